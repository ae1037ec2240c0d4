//! Python bindings for the metamax crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use metamax::bench::BenchmarkSpec;
use metamax::harness::{run_experiment as run_experiment_rs, verify_theorems as verify_theorems_rs, ExperimentConfig};
use metamax::hull::{HFunction, TieBreak};
use metamax::instance::{InstanceState, Status};
use metamax::{Error, StrategyConfig, StrategyKind};

/// `(evals, mean, std, ci99_halfwidth, runs)`.
type CurveRow = (u64, f64, Option<f64>, Option<f64>, usize);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } | Error::OutOfBox { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Modified Griewank function on `[-1, 1]^d`. Its maximum is 1 at the origin.
#[pyfunction]
fn griewank_mod(x: Vec<f64>) -> PyResult<f64> {
    metamax::objective::BoxBounds::cube(x.len(), -1.0, 1.0)
        .check(&x)
        .map_err(to_py)?;
    Ok(metamax::bench::griewank::griewank_mod(&x))
}

/// Length of the `i`-th Luby run, `i >= 1`.
#[pyfunction]
fn luby_length(i: u64) -> PyResult<u64> {
    if i == 0 {
        return Err(PyValueError::new_err("luby index starts at 1"));
    }
    Ok(metamax::strategy::luby_length(i))
}

/// Indices stepped by one METAMAX round for `(n, best_value)` pairs.
///
/// With `alpha` the weight is `alpha**n`; otherwise `exp(-n / sqrt(t))` with
/// `t` the total step count (or `total_steps` when given). Ties go to the
/// smallest index.
#[pyfunction]
#[pyo3(signature = (states, alpha=None, total_steps=None))]
fn select_metamax(states: Vec<(u64, f64)>, alpha: Option<f64>, total_steps: Option<f64>) -> PyResult<Vec<usize>> {
    let pool: Vec<InstanceState> = states
        .iter()
        .enumerate()
        .map(|(id, &(n, best_value))| InstanceState {
            id,
            n,
            best_value,
            best_point: None,
            status: Status::Active,
        })
        .collect();
    let h = match alpha {
        Some(alpha) if alpha > 0.0 && alpha < 1.0 => HFunction::Exponential { alpha },
        Some(alpha) => return Err(PyValueError::new_err(format!("alpha must lie in (0, 1), got {alpha}"))),
        None => {
            let t = total_steps.unwrap_or_else(|| states.iter().map(|s| s.0 as f64).sum());
            HFunction::TimeVarying {
                total_steps: t.max(1.0),
            }
        }
    };
    metamax::hull::select_metamax(&pool, &h, TieBreak::SmallestIndex).map_err(to_py)
}

/// Runs one strategy once and returns its trace as a dict.
#[pyfunction]
#[pyo3(signature = (strategy, benchmark, budget, seed=0, k=100))]
fn run_strategy<'py>(
    py: Python<'py>,
    strategy: &str,
    benchmark: &str,
    budget: u64,
    seed: u64,
    k: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let kind =
        StrategyKind::parse(strategy).ok_or_else(|| PyValueError::new_err(format!("unknown strategy {strategy:?}")))?;
    let bench = BenchmarkSpec::parse(benchmark)
        .and_then(|b| b.prepare())
        .map_err(to_py)?;
    let mut obj = bench.objective().map_err(to_py)?;
    let mut factory = bench.factory(metamax::seed::derive_seed(seed, &[1]));
    let config = StrategyConfig::new(kind, budget).with_k(k);
    let trace = py.detach(|| metamax::run_strategy(&config, &mut obj, factory.as_mut(), seed));

    let out = PyDict::new(py);
    out.set_item("strategy", &trace.strategy)?;
    out.set_item("valid", trace.valid)?;
    out.set_item("error", trace.error.as_deref())?;
    out.set_item("evals", obj.eval_count())?;
    out.set_item("best", trace.final_best())?;
    out.set_item("checkpoints", &trace.checkpoints)?;
    let rounds: Vec<(u64, usize, u64, u64)> = trace
        .rounds
        .iter()
        .map(|r| (r.round, r.leader, r.leader_steps, r.total_steps))
        .collect();
    out.set_item("rounds", rounds)?;
    Ok(out)
}

/// Runs an experiment from JSON or `key = value` config text. Returns the
/// aggregated curves keyed by strategy label: lists of
/// `(evals, mean, std, ci99_halfwidth, runs)`.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    cfg.validate().map_err(to_py)?;
    let result = py.detach(|| run_experiment_rs(&cfg)).map_err(to_py)?;

    let curves = PyDict::new(py);
    for c in &result.curves {
        let pts: Vec<CurveRow> = c
            .points
            .iter()
            .map(|p| (p.evals, p.mean, p.std, p.ci99_halfwidth, p.runs))
            .collect();
        curves.set_item(&c.strategy, pts)?;
    }
    let out = PyDict::new(py);
    out.set_item("curves", curves)?;
    out.set_item("known_max", result.known_max)?;
    out.set_item("invalid_runs", result.invalid_runs().count())?;
    out.set_item(
        "violations",
        result.violations().map(|(_, v)| v.clone()).collect::<Vec<_>>(),
    )?;
    Ok(out)
}

/// The synthetic theory probes as `(name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn verify_theorems(py: Python<'_>, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| verify_theorems_rs(seed))
        .into_iter()
        .map(|o| (o.name.to_string(), o.passed(), o.detail))
        .collect()
}

#[pymodule]
fn metamax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(griewank_mod, m)?)?;
    m.add_function(wrap_pyfunction!(luby_length, m)?)?;
    m.add_function(wrap_pyfunction!(select_metamax, m)?)?;
    m.add_function(wrap_pyfunction!(run_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorems, m)?)?;
    Ok(())
}
