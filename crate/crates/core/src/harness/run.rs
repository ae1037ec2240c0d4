//! Batched runs of an experiment.

use rayon::prelude::*;

use crate::bench::Benchmark;
use crate::error::Result;
use crate::harness::aggregate::{aggregate, AggregateCurve};
use crate::harness::config::ExperimentConfig;
use crate::harness::output::{RoundRow, TraceRow};
use crate::harness::theory::InvariantMonitor;
use crate::instance::RunTrace;
use crate::seed::derive_seed;
use crate::strategy::run_strategy_observed;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub strategy_index: usize,
    pub strategy: String,
    pub run: usize,
    pub seed: u64,
    pub trace: RunTrace,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub outcomes: Vec<RunOutcome>,
    pub curves: Vec<AggregateCurve>,
    pub grid: Vec<u64>,
    pub known_max: Option<f64>,
}

impl ExperimentResult {
    pub fn invalid_runs(&self) -> impl Iterator<Item = &RunOutcome> {
        self.outcomes.iter().filter(|o| !o.trace.valid)
    }

    pub fn violations(&self) -> impl Iterator<Item = (&RunOutcome, &String)> {
        self.outcomes
            .iter()
            .flat_map(|o| o.violations.iter().map(move |v| (o, v)))
    }

    /// Best-so-far of every valid run at each grid point it has reached.
    pub fn trace_rows(&self) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for o in self.outcomes.iter().filter(|o| o.trace.valid) {
            for &e in &self.grid {
                if let Some(v) = o.trace.best_at(e) {
                    rows.push(TraceRow {
                        strategy: o.strategy.clone(),
                        run: o.run,
                        eval_count: e,
                        best_value: v,
                    });
                }
            }
        }
        rows
    }

    pub fn round_rows(&self) -> Vec<RoundRow> {
        self.outcomes
            .iter()
            .filter(|o| o.trace.valid)
            .flat_map(|o| {
                o.trace.rounds.iter().map(|r| RoundRow {
                    strategy: o.strategy.clone(),
                    run: o.run,
                    record: r.clone(),
                })
            })
            .collect()
    }
}

/// Seed of run `run` of strategy `strategy`.
pub fn run_seed(base: u64, strategy: usize, run: usize) -> u64 {
    derive_seed(base, &[strategy as u64, run as u64])
}

fn single_run(bench: &Benchmark, config: &ExperimentConfig, si: usize, run: usize) -> Result<RunOutcome> {
    let strategy = config.resolved_strategies().swap_remove(si);
    let seed = run_seed(config.seed, si, run);
    let mut objective = bench.objective()?;
    let mut factory = bench.factory(derive_seed(seed, &[1]));
    let mut monitor = InvariantMonitor::new(strategy.kind);
    let trace = run_strategy_observed(&strategy, &mut objective, factory.as_mut(), seed, &mut |rec, pool| {
        monitor.observe(rec, pool)
    });
    if let Some(e) = &trace.error {
        log::warn!("{} run {run} failed: {e}", strategy.label());
    }
    Ok(RunOutcome {
        strategy_index: si,
        strategy: strategy.label(),
        run,
        seed,
        trace,
        violations: monitor.violations,
    })
}

/// Runs every strategy `runs` times, in parallel, and aggregates the valid
/// traces. Results do not depend on thread scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let bench = config.benchmark.prepare()?;
    let known_max = bench.objective()?.known_max();
    let jobs: Vec<(usize, usize)> = (0..config.strategies.len())
        .flat_map(|s| (0..config.runs).map(move |r| (s, r)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(s, r)| single_run(&bench, config, s, r))
        .collect::<Result<Vec<_>>>()?;
    let grid = config.checkpoint_grid();
    let curves = config
        .resolved_strategies()
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let traces: Vec<&RunTrace> = outcomes
                .iter()
                .filter(|o| o.strategy_index == si && o.trace.valid)
                .map(|o| &o.trace)
                .collect();
            aggregate(&s.label(), &traces, &grid, known_max)
        })
        .collect();
    Ok(ExperimentResult {
        outcomes,
        curves,
        grid,
        known_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn rand_budget_three() {
        let c = config("benchmark = griewank_mod:2\nstrategies = rand\nbudget = 3\ncheckpoints = 1,2,3");
        let r = run_experiment(&c).unwrap();
        let t = &r.outcomes[0].trace;
        assert_eq!(t.checkpoints.iter().map(|c| c.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(r.trace_rows().len(), 3);
    }

    #[test]
    fn seeds_fix_everything() {
        let text = "benchmark = synthetic:1,0.8,0.5\nstrategies = metamax, metamax_k, thrasc, luby\n\
                    strategy.k = 3\nruns = 3\nbudget = 400\nseed = 5";
        let a = run_experiment(&config(text)).unwrap();
        let b = run_experiment(&config(text)).unwrap();
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.trace, y.trace);
        }
        assert_eq!(a.curves, b.curves);
        assert!(a.violations().next().is_none());
    }

    #[test]
    fn single_run_curve_has_no_interval() {
        let c = config("benchmark = griewank_mod:2\nstrategies = metamax\nbudget = 300");
        let r = run_experiment(&c).unwrap();
        let p = r.curves[0].last().unwrap();
        assert_eq!((p.evals, p.runs), (300, 1));
        assert!(p.std.is_none() && p.ci99_halfwidth.is_none());
        assert!(r.outcomes[0].trace.rounds.len() > 5);
    }

    #[test]
    fn failing_runs_are_excluded() {
        let c = config(
            r#"benchmark.kind = subprocess
               benchmark.command = ["sh", "-c", "exit 3"]
               benchmark.dimension = 1
               strategies = unif
               strategy.k = 2
               runs = 2
               budget = 10"#,
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.invalid_runs().count(), 2);
        assert!(r.curves[0].points.is_empty());
    }
}
