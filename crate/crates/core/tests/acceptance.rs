//! Acceptance checks, one PASS/FAIL line each. Run with
//! `cargo test --test acceptance`. Set `METAMAX_CLOUD_DATA` to the UCI cloud
//! data file to include the full-size clustering check.

mod common;

use std::time::Instant;

use metamax::bench::synthetic::{synthetic_objective, SyntheticCurve, SyntheticFactory};
use metamax::bench::BenchmarkSpec;
use metamax::harness::theory::{
    griewank_metamax_violations, metamax_k_rounds, random_curves, InvariantMonitor, TheoryProbe,
};
use metamax::harness::{run_experiment, ExperimentConfig};
use metamax::hull::{hull_candidates, HSchedule};
use metamax::instance::Searcher;
use metamax::objective::{BoxBounds, Objective};
use metamax::search::kmeans::{
    kmeans_init_pp, kmeans_init_uniform, lloyd_step, Dataset, KmeansInit, KmeansState, SeedWeighting,
};
use metamax::search::spsa::{gradient_estimate, rademacher};
use metamax::seed::derive_seed;
use metamax::strategy::luby_length;
use metamax::{run_strategy, run_strategy_observed, RunTrace, StrategyConfig, StrategyKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0x5eed_2009;

struct Outcome {
    pass: Option<bool>,
    detail: String,
}

fn pass(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: Some(ok),
        detail: detail.into(),
    }
}

fn seed_for(criterion: u64, run: u64) -> u64 {
    derive_seed(SEED, &[criterion, run])
}

fn ac1() -> Outcome {
    let griewank: Vec<(Vec<String>, usize)> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let (v, trace) = griewank_metamax_violations(2, 10_000, seed_for(1, run));
            (v, trace.rounds.len())
        })
        .collect();
    let synthetic: Vec<(Vec<String>, usize)> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let curves = random_curves(50, seed_for(11, run));
            let mut obj = synthetic_objective(&curves);
            let mut factory = SyntheticFactory { curves };
            let config = StrategyConfig::new(StrategyKind::Metamax, 10_000);
            let mut m = InvariantMonitor::new(StrategyKind::Metamax);
            let trace = run_strategy_observed(&config, &mut obj, &mut factory, seed_for(12, run), &mut |r, p| {
                m.observe(r, p)
            });
            let mut v = m.violations;
            v.extend(trace.error);
            (v, trace.rounds.len())
        })
        .collect();
    let count = |x: &[(Vec<String>, usize)]| x.iter().map(|r| r.0.len()).sum::<usize>();
    let rounds = |x: &[(Vec<String>, usize)]| x.iter().map(|r| r.1).sum::<usize>();
    let (vg, vs) = (count(&griewank), count(&synthetic));
    let first = griewank.iter().chain(&synthetic).flat_map(|r| r.0.first()).next();
    pass(
        vg + vs == 0,
        format!(
            "{} griewank rounds, {} synthetic rounds, {} violations{}",
            rounds(&griewank),
            rounds(&synthetic),
            vg + vs,
            first.map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn ac2() -> Outcome {
    let results: Vec<Result<(Vec<String>, u64), String>> = (0..100u64)
        .into_par_iter()
        .map(|run| {
            let curves = random_curves(20, seed_for(2, run));
            let mut m = InvariantMonitor::new(StrategyKind::MetamaxK);
            metamax_k_rounds(&curves, HSchedule::TimeVarying, 10_000, seed_for(21, run), |r, p| {
                m.observe(r, p)
            })
            .map_err(|e| e.to_string())?;
            Ok((m.violations, m.rounds_checked))
        })
        .collect();
    let mut violations = 0;
    let mut rounds = 0;
    let mut first = None;
    for r in results {
        match r {
            Ok((v, n)) => {
                violations += v.len();
                rounds += n;
                first = first.or(v.into_iter().next());
            }
            Err(e) => {
                violations += 1;
                first = first.or(Some(e));
            }
        }
    }
    pass(
        violations == 0 && rounds == 100 * 10_000,
        format!(
            "{rounds} rounds, {violations} violations{}",
            first.map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(3, 0));
    let grid = common::log_grid(1e-9, 1e9, 20_000);
    let (mut mismatches, mut boundary, mut compared) = (0, 0, 0);
    for _ in 0..1000 {
        let k = rng.random_range(1..=8usize);
        let coarse = rng.random_bool(0.3);
        let alpha = rng.random_range(0.05..0.95);
        let h = if rng.random_bool(0.5) {
            metamax::hull::HFunction::Exponential { alpha }
        } else {
            metamax::hull::HFunction::TimeVarying {
                total_steps: rng.random_range(1.0..500.0),
            }
        };
        let states: Vec<_> = (0..k)
            .map(|i| {
                let f = if coarse {
                    rng.random_range(0..=4u32) as f64 / 4.0
                } else {
                    rng.random_range(0.0..=1.0)
                };
                common::state(i, rng.random_range(0..=20u64), f)
            })
            .collect();
        let pts: Vec<(u64, f64, f64)> = states.iter().map(|s| (s.n, s.best_value, h.value(s.n))).collect();
        let swept = common::csweep(&pts, &grid);
        let hull: std::collections::BTreeSet<usize> = hull_candidates(&states, &h)
            .expect("active pool")
            .into_iter()
            .flatten()
            .collect();
        let mut is_boundary = false;
        let mut bad = false;
        for i in 0..k {
            let (lo, hi) = common::win_interval(&pts, i);
            let open = lo < hi;
            let on_grid = grid.iter().any(|&c| c > lo && c < hi);
            if open != on_grid || (open && hi.is_finite() && hi - lo <= 1e-9 * hi.max(1.0)) {
                is_boundary = true;
            }
            if swept[i] != hull.contains(&i) {
                bad = true;
            }
        }
        if is_boundary {
            boundary += 1;
            continue;
        }
        compared += 1;
        mismatches += usize::from(bad);
    }
    pass(
        mismatches == 0,
        format!("{compared} configurations compared, {boundary} grid-boundary cases excluded, {mismatches} mismatches"),
    )
}

fn usage_ratios(limits: &[f64], alpha: f64, criterion: u64) -> (Vec<f64>, TheoryProbe) {
    let curves: Vec<SyntheticCurve> = limits.iter().map(|&l| SyntheticCurve::new(l, 1.0)).collect();
    let probe = TheoryProbe::from_curves(&curves);
    let ratios = (0..20u64)
        .into_par_iter()
        .map(|run| {
            let states = metamax_k_rounds(
                &curves,
                HSchedule::Fixed { alpha },
                10_000,
                seed_for(criterion, run),
                |_, _| {},
            )
            .expect("synthetic run");
            probe.usage_ratio(&states)
        })
        .collect();
    (ratios, probe)
}

fn ac4() -> Outcome {
    let (ratios, _) = usage_ratios(&[1.0, 1.0, 0.5, 0.5], 0.25, 4);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    pass(
        ratios.iter().all(|&r| r >= 0.45),
        format!("min optimal usage {min:.4} over 20 runs (need >= 0.45)"),
    )
}

fn ac5() -> Outcome {
    let (ratios, probe) = usage_ratios(&[1.0, 0.6, 0.6, 0.6, 0.3], 0.9, 5);
    let bound = probe.group_usage_bound().expect("suboptimal groups") - 0.05;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    pass(
        ratios.iter().all(|&r| r >= bound),
        format!("min optimal usage {min:.4} over 20 runs (need >= {bound:.4})"),
    )
}

fn ac6() -> Outcome {
    let mut oracle = common::LubyOracle::new();
    let mismatches = (1..=1000u64).filter(|&i| luby_length(i) != oracle.term(i)).count();
    let prefix: Vec<u64> = (1..=15).map(luby_length).collect();
    let ok_prefix = prefix == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
    pass(
        mismatches == 0 && ok_prefix,
        format!("{mismatches} mismatches in 1000 terms, prefix {prefix:?}"),
    )
}

fn ac7() -> Outcome {
    let text = r#"{
        "benchmark": {"kind": "griewank_mod", "d": 2, "spsa": {"a": 0.05, "phi": 0.1}},
        "strategies": [{"kind": "metamax"}, {"kind": "unif"}, {"kind": "rand"}],
        "runs": 200, "budget": 20000, "seed": 7
    }"#;
    let mut config = ExperimentConfig::parse(text).expect("config");
    config.seed = seed_for(7, 0);
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => return pass(false, e.to_string()),
    };
    let invalid = result.invalid_runs().count();
    let last = |name: &str| {
        let c = result.curves.iter().find(|c| c.strategy == name).expect("curve");
        let p = c.last().expect("points").clone();
        (p.mean, p.ci99_halfwidth.unwrap_or(f64::INFINITY), p.runs)
    };
    let (m, u, r) = (last("metamax"), last("unif"), last("rand"));
    let beats = |a: (f64, f64, usize), b: (f64, f64, usize)| a.0 < b.0 && a.0 + a.1 < b.0 - b.1;
    pass(
        invalid == 0 && beats(m, u) && beats(m, r) && m.2 == 200,
        format!(
            "final mean error metamax {:.3e} +/- {:.1e}, unif {:.3e} +/- {:.1e}, rand {:.3e} +/- {:.1e}",
            m.0, m.1, u.0, u.1, r.0, r.1
        ),
    )
}

/// Best cost of the best-so-far trace of a clustering run.
fn final_cost(trace: &RunTrace) -> f64 {
    -trace.final_best().expect("at least one step")
}

fn clustering_spec(path: &str) -> BenchmarkSpec {
    BenchmarkSpec::Clustering {
        path: path.into(),
        n_clusters: 10,
        init: KmeansInit::PlusPlus,
        weighting: SeedWeighting::Squared,
    }
}

fn ac8a() -> Outcome {
    let bench = clustering_spec("builtin:gmm").prepare().expect("bundled data");
    let data = bench.dataset().expect("clustering data").clone();
    // serial oracle: 1000 k-means++ restarts, each run to termination
    let oracle: Vec<(f64, u64)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut obj = bench.objective().expect("objective");
            let mut s = metamax::search::Kmeans::new(data.clone(), 10, KmeansInit::PlusPlus, seed_for(80, i));
            let mut steps = 0u64;
            while !s.is_terminated() {
                s.step(&mut obj).expect("lloyd step");
                steps += 1;
            }
            (s.state().expect("seeded").cost, steps)
        })
        .collect();
    let best = oracle.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    let total: u64 = oracle.iter().map(|o| o.1).sum();
    let budget = total / 2;
    let costs: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|trial| {
            let mut obj = bench.objective().expect("objective");
            let mut factory = bench.factory(seed_for(81, trial));
            let trace = run_strategy(
                &StrategyConfig::new(StrategyKind::Metamax, budget),
                &mut obj,
                factory.as_mut(),
                seed_for(82, trial),
            );
            if trace.valid {
                final_cost(&trace)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let hits = costs.iter().filter(|&&c| c <= best * (1.0 + 1e-3)).count();
    let worst = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    pass(
        hits >= 18,
        format!(
            "oracle best {best:.4} in {total} steps; metamax with {budget} steps within 0.1% in {hits}/20 trials (worst {worst:.4})"
        ),
    )
}

fn ac8b() -> Outcome {
    let Ok(path) = std::env::var("METAMAX_CLOUD_DATA") else {
        return Outcome {
            pass: None,
            detail: "METAMAX_CLOUD_DATA not set".into(),
        };
    };
    let bench = match clustering_spec(&path).prepare() {
        Ok(b) => b,
        Err(e) => return pass(false, e.to_string()),
    };
    let mut obj = bench.objective().expect("objective");
    let mut factory = bench.factory(seed_for(83, 0));
    let trace = run_strategy(
        &StrategyConfig::new(StrategyKind::Metamax, 100_000),
        &mut obj,
        factory.as_mut(),
        seed_for(84, 0),
    );
    if !trace.valid {
        return pass(false, trace.error.unwrap_or_default());
    }
    let cost = final_cost(&trace);
    pass(
        cost <= 5683.0,
        format!("best cost {cost:.4} after {} steps (need <= 5683)", obj.eval_count()),
    )
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let d = rng.random_range(1..=4usize);
    let m = rng.random_range(2..=60usize);
    let scale = 10f64.powi(rng.random_range(-2..=3));
    let values = (0..m * d).map(|_| rng.random_range(-scale..scale)).collect();
    Dataset::new(m, d, values).expect("finite")
}

fn ac9() -> Outcome {
    let results: Vec<(usize, u64)> = (0..10_000u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_for(9, case));
            let data = random_dataset(&mut rng);
            let n = rng.random_range(1..=data.rows().min(8));
            let centers = if rng.random_bool(0.5) {
                kmeans_init_pp(&data, n, SeedWeighting::Squared, &mut rng)
            } else {
                kmeans_init_uniform(&data, n, &mut rng)
            }
            .expect("enough rows");
            let mut state = KmeansState::new(&data, centers).expect("centers");
            let (mut bad, mut steps) = (0, 0);
            while !state.terminated && steps < 1000 {
                let next = lloyd_step(&state, &data).expect("step");
                bad += usize::from(next.cost > state.cost);
                steps += 1;
                state = next;
            }
            (bad, steps)
        })
        .collect();
    let violations: usize = results.iter().map(|r| r.0).sum();
    let steps: u64 = results.iter().map(|r| r.1).sum();
    pass(
        violations == 0,
        format!("10000 cases, {steps} Lloyd steps, {violations} cost increases"),
    )
}

fn ac10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(10, 0));
    let d = 5;
    let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cc = c.clone();
    let mut obj = Objective::new(
        move |x: &[f64]| x.iter().zip(&cc).map(|(a, b)| a * b).sum::<f64>(),
        BoxBounds::cube(d, -10.0, 10.0),
    );
    let x = vec![0.3, -0.2, 0.1, 0.0, 0.5];
    let draws = 100_000;
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for _ in 0..draws {
        let delta = rademacher(&mut rng, d);
        let (g, _) = gradient_estimate(&mut obj, &x, 0.1, &delta).expect("in box");
        for l in 0..d {
            sum[l] += g[l];
            sq[l] += g[l] * g[l];
        }
    }
    let mut worst = 0.0f64;
    for l in 0..d {
        let mean = sum[l] / draws as f64;
        let var = (sq[l] - draws as f64 * mean * mean) / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        worst = worst.max((mean - c[l]).abs() / se);
    }

    let mut quad_err = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(-1.0..1.0);
        let x0 = rng.random_range(-1.0..1.0);
        let phi = rng.random_range(0.01..0.5);
        let mut q = Objective::new(
            move |x: &[f64]| -(x[0] - m) * (x[0] - m),
            BoxBounds::cube(1, -10.0, 10.0),
        );
        let delta = rademacher(&mut rng, 1);
        let (g, _) = gradient_estimate(&mut q, &[x0], phi, &delta).expect("in box");
        quad_err = quad_err.max((g[0] + 2.0 * (x0 - m)).abs());
    }
    pass(
        worst <= 3.0 && quad_err <= 1e-12,
        format!("largest deviation {worst:.2} standard errors; 1-D quadratic max error {quad_err:.1e}"),
    )
}

/// METAMAX runs on Griewank-mod d=2 with `T = 10^5`, shared by the growth
/// and consistency checks.
fn long_griewank_runs() -> Vec<(Vec<String>, RunTrace)> {
    (0..20u64)
        .into_par_iter()
        .map(|run| griewank_metamax_violations(2, 100_000, seed_for(11, run)))
        .collect()
}

fn ac11(runs: &[(Vec<String>, RunTrace)]) -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut checked = 0;
    let mut bad = 0;
    for (_, trace) in runs {
        for rec in trace.rounds.iter().filter(|r| r.total_steps >= 10_000) {
            let t = rec.total_steps as f64;
            let ratio = rec.round as f64 * t.ln() / t;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            checked += 1;
            bad += usize::from(!(0.3..=2.0).contains(&ratio));
        }
    }
    pass(
        bad == 0 && checked > 0,
        format!("{checked} rounds with t >= 1e4, r ln t / t in [{lo:.3}, {hi:.3}] (need [0.3, 2.0])"),
    )
}

fn ac12(runs: &[(Vec<String>, RunTrace)]) -> Outcome {
    let errors: Vec<f64> = runs
        .iter()
        .map(|(_, t)| {
            if t.valid {
                1.0 - t.final_best().unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let worst = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violations: usize = runs.iter().map(|r| r.0.len()).sum();
    pass(
        errors.iter().all(|&e| e < 1e-3),
        format!("worst final error {worst:.3e} over 20 runs ({violations} invariant violations)"),
    )
}

fn main() {
    let long_runs = std::sync::OnceLock::new();
    let long = || long_runs.get_or_init(long_griewank_runs);
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, &str, Check)> = vec![
        ("AC-1", "leader step-count bounds", Box::new(ac1)),
        ("AC-2", "fixed-pool min step count", Box::new(ac2)),
        ("AC-3", "hull selection oracle", Box::new(ac3)),
        ("AC-4", "optimal usage, equal limits", Box::new(ac4)),
        ("AC-5", "optimal usage, grouped limits", Box::new(ac5)),
        ("AC-6", "Luby sequence", Box::new(ac6)),
        ("AC-7", "Griewank ordering", Box::new(ac7)),
        ("AC-8a", "k-means vs serial oracle", Box::new(ac8a)),
        ("AC-8b", "k-means on cloud data", Box::new(ac8b)),
        ("AC-9", "Lloyd monotonicity", Box::new(ac9)),
        ("AC-10", "SPSA gradient estimate", Box::new(ac10)),
        ("AC-11", "instance growth band", Box::new(|| ac11(long()))),
        ("AC-12", "consistency on Griewank", Box::new(|| ac12(long()))),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        let t = Instant::now();
        let o = f();
        let tag = match o.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        failed += usize::from(o.pass == Some(false));
        println!("[{tag}] {id} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
