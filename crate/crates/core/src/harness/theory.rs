//! Runtime checks of the METAMAX guarantees, and the probes behind
//! `verify theorems`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{griewank_objective, synthetic_objective, SyntheticCurve, SyntheticFactory};
use crate::error::Result;
use crate::hull::HSchedule;
use crate::instance::{Instance, InstanceState, RoundRecord, RunTrace};
use crate::objective::BoxBounds;
use crate::search::spsa::{SpsaFactory, SpsaParams};
use crate::seed::derive_seed;
use crate::strategy::{
    run_strategy_observed, MetaMaxK, MetaMaxUnbounded, RoundStatus, RunContext, StrategyConfig, StrategyKind,
};

/// `r <= n_{I_r} < 2r` and `n_{I_r} >= (sqrt(2 t_r + 7) - 1) / 2`.
pub fn leader_steps_violation(rec: &RoundRecord) -> Option<String> {
    let (r, n, t) = (rec.round, rec.leader_steps, rec.total_steps);
    if n < r || n >= 2 * r {
        return Some(format!("round {r}: leader has {n} steps, outside [r, 2r)"));
    }
    // 2n + 1 >= sqrt(2t + 7), squared to stay in integers
    let lhs = (2 * n as u128 + 1).pow(2);
    if lhs < 2 * t as u128 + 7 {
        return Some(format!("round {r}: leader has {n} steps, below the bound for t = {t}"));
    }
    None
}

/// After round `r` of METAMAX(K), every instance has at least `floor(r / K)`
/// steps.
pub fn min_steps_violation(round: u64, pool: &[Instance]) -> Option<String> {
    let k = pool.len() as u64;
    let min = pool.iter().map(|i| i.state.n).min()?;
    (min < round / k).then(|| format!("round {round}: least-stepped instance has {min} < {} steps", round / k))
}

/// The METAMAX leader has at least as many steps as any instance.
pub fn dominance_violation(rec: &RoundRecord, pool: &[Instance]) -> Option<String> {
    let max = pool.iter().map(|i| i.state.n).max()?;
    (rec.leader_steps < max).then(|| {
        format!(
            "round {}: leader has {} steps but another instance has {max}",
            rec.round, rec.leader_steps
        )
    })
}

pub fn pool_growth_violation(rec: &RoundRecord) -> Option<String> {
    (rec.pool_size as u64 != rec.round).then(|| format!("round {}: pool holds {} instances", rec.round, rec.pool_size))
}

/// Collects invariant violations round by round. The step-count guarantees
/// assume searchers never terminate, so once any instance in the pool has
/// terminated the remaining rounds of the run are not checked.
#[derive(Debug, Clone)]
pub struct InvariantMonitor {
    kind: StrategyKind,
    pub violations: Vec<String>,
    pub rounds_checked: u64,
    stopped: bool,
}

impl InvariantMonitor {
    pub fn new(kind: StrategyKind) -> Self {
        InvariantMonitor {
            kind,
            violations: Vec::new(),
            rounds_checked: 0,
            stopped: false,
        }
    }

    pub fn observe(&mut self, rec: &RoundRecord, pool: &[Instance]) {
        if self.stopped || pool.iter().any(|i| !i.state.is_active()) {
            self.stopped = true;
            return;
        }
        self.rounds_checked += 1;
        let mut found = Vec::new();
        match self.kind {
            StrategyKind::Metamax => {
                found.extend(leader_steps_violation(rec));
                found.extend(dominance_violation(rec, pool));
                found.extend(pool_growth_violation(rec));
            }
            StrategyKind::MetamaxInf => found.extend(pool_growth_violation(rec)),
            StrategyKind::MetamaxK => found.extend(min_steps_violation(rec.round, pool)),
            _ => {}
        }
        self.violations.extend(found);
    }
}

/// Derived quantities of a synthetic pool: the optimal set, the margin and
/// the suboptimal group sizes. Instance `i` follows curve `i mod len`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryProbe {
    limits: Vec<f64>,
    pub f_star: f64,
    pub optimal: Vec<usize>,
    /// `f* - ` the best suboptimal limit; absent when every limit is optimal.
    pub delta: Option<f64>,
    pub k0: usize,
    /// Sizes of the suboptimal limit groups, best limit first.
    pub group_sizes: Vec<usize>,
    pub k_max: usize,
}

impl TheoryProbe {
    pub fn from_curves(curves: &[SyntheticCurve]) -> Self {
        let limits: Vec<f64> = curves.iter().map(|c| c.limit).collect();
        let f_star = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let optimal: Vec<usize> = (0..limits.len()).filter(|&i| limits[i] == f_star).collect();
        let mut sub: Vec<f64> = limits.iter().copied().filter(|&l| l != f_star).collect();
        sub.sort_by(|a, b| b.total_cmp(a));
        let mut group_sizes = Vec::new();
        let mut prev = None;
        for l in &sub {
            if prev == Some(*l) {
                *group_sizes.last_mut().unwrap() += 1;
            } else {
                group_sizes.push(1);
                prev = Some(*l);
            }
        }
        TheoryProbe {
            delta: sub.first().map(|s| f_star - s),
            k0: optimal.len(),
            k_max: group_sizes.iter().copied().max().unwrap_or(0),
            group_sizes,
            optimal,
            f_star,
            limits,
        }
    }

    pub fn limit(&self, id: usize) -> f64 {
        self.limits[id % self.limits.len()]
    }

    pub fn is_optimal(&self, id: usize) -> bool {
        self.limit(id) == self.f_star
    }

    /// Share of all steps taken by optimal instances.
    pub fn usage_ratio<'a>(&self, states: impl IntoIterator<Item = &'a InstanceState>) -> f64 {
        let (mut opt, mut all) = (0u64, 0u64);
        for s in states {
            all += s.n;
            if self.is_optimal(s.id) {
                opt += s.n;
            }
        }
        opt as f64 / all as f64
    }

    /// `k_max / (K - k_0 + k_max)` for a fixed pool of one instance per curve.
    pub fn group_usage_bound(&self) -> Option<f64> {
        let k = self.limits.len();
        (self.k_max > 0).then(|| self.k_max as f64 / (k - self.k0 + self.k_max) as f64)
    }

    /// Bound on the number of instances with estimates `<= f* - delta`
    /// stepped per round once the leader is `delta / 2`-optimal, for
    /// `h(n) = alpha^n`.
    pub fn low_instance_bound(&self, alpha: f64) -> Option<u64> {
        let d = self.delta?;
        Some((((2.0 * self.f_star - d) / d).ln() / (1.0 / alpha).ln()).ceil() as u64)
    }
}

/// `1 - max f_i / f_r` over instances whose estimate differs from the best.
pub fn epsilon_r<'a>(states: impl IntoIterator<Item = &'a InstanceState> + Clone) -> Option<f64> {
    let best = states
        .clone()
        .into_iter()
        .map(|s| s.best_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let second = states
        .into_iter()
        .map(|s| s.best_value)
        .filter(|&v| v != best)
        .fold(f64::NEG_INFINITY, f64::max);
    (second > f64::NEG_INFINITY && best > 0.0).then(|| 1.0 - second / best)
}

/// `ceil(ln eps / ln alpha) + 1` instances per round at most.
pub fn round_size_bound(eps: f64, alpha: f64) -> u64 {
    (eps.ln() / alpha.ln()).ceil() as u64 + 1
}

/// Random curves with limits in `[0.1, 1]` and rates in `[0.01, 2]`.
pub fn random_curves(count: usize, seed: u64) -> Vec<SyntheticCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| SyntheticCurve::new(rng.random_range(0.1..=1.0), rng.random_range(0.01..=2.0)))
        .collect()
}

fn tie_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x71e]))
}

/// Runs METAMAX(K) with one instance per curve for exactly `rounds` rounds
/// after initialization and returns the final states.
pub fn metamax_k_rounds(
    curves: &[SyntheticCurve],
    h: HSchedule,
    rounds: u64,
    seed: u64,
    mut observe: impl FnMut(&RoundRecord, &[Instance]),
) -> Result<Vec<InstanceState>> {
    let mut objective = synthetic_objective(curves);
    let mut factory = SyntheticFactory {
        curves: curves.to_vec(),
    };
    let mut ctx = RunContext::new(&mut objective, &mut factory, u64::MAX, RunTrace::new("metamax_k", seed));
    let mut s = MetaMaxK::new(curves.len(), h, tie_rng(seed));
    s.initialize(&mut ctx)?;
    for _ in 0..rounds {
        match s.round(&mut ctx)? {
            RoundStatus::Completed(rec) => observe(&rec, s.pool()),
            _ => break,
        }
    }
    Ok(s.pool().iter().map(|i| i.state.clone()).collect())
}

/// Runs METAMAX (with `catch_up`) or METAMAX(∞) for `rounds` rounds.
pub fn metamax_unbounded_rounds(
    curves: &[SyntheticCurve],
    h: HSchedule,
    catch_up: bool,
    rounds: u64,
    seed: u64,
    mut observe: impl FnMut(&RoundRecord, &[Instance]),
) -> Result<Vec<InstanceState>> {
    let mut objective = synthetic_objective(curves);
    let mut factory = SyntheticFactory {
        curves: curves.to_vec(),
    };
    let mut ctx = RunContext::new(&mut objective, &mut factory, u64::MAX, RunTrace::new("metamax", seed));
    let mut s = MetaMaxUnbounded::new(h, catch_up, tie_rng(seed));
    for _ in 0..rounds {
        match s.round(&mut ctx)? {
            RoundStatus::Completed(rec) => observe(&rec, s.pool()),
            _ => break,
        }
    }
    Ok(s.pool().iter().map(|i| i.state.clone()).collect())
}

/// Result of one probe of the `verify theorems` suite.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub name: &'static str,
    pub runs: usize,
    pub violations: Vec<String>,
    pub detail: String,
}

impl ProbeOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn probe(name: &'static str, runs: usize, body: impl Fn(u64) -> Result<(Vec<String>, String)>) -> ProbeOutcome {
    let mut violations = Vec::new();
    let mut details = Vec::new();
    for run in 0..runs {
        match body(run as u64) {
            Ok((v, d)) => {
                violations.extend(v.into_iter().map(|m| format!("run {run}: {m}")));
                details.push(d);
            }
            Err(e) => violations.push(format!("run {run}: {e}")),
        }
    }
    let detail = details.into_iter().rfind(|d| !d.is_empty()).unwrap_or_default();
    ProbeOutcome {
        name,
        runs,
        violations,
        detail,
    }
}

/// Leader step-count check of one METAMAX run on Griewank-mod with SPSA.
pub fn griewank_metamax_violations(d: usize, budget: u64, seed: u64) -> (Vec<String>, RunTrace) {
    let mut objective = griewank_objective(d);
    let mut factory = SpsaFactory {
        params: SpsaParams::default(),
        bounds: BoxBounds::cube(d, -1.0, 1.0),
        seed: derive_seed(seed, &[1]),
    };
    let config = StrategyConfig::new(StrategyKind::Metamax, budget);
    let mut monitor = InvariantMonitor::new(StrategyKind::Metamax);
    let trace = run_strategy_observed(&config, &mut objective, &mut factory, seed, &mut |rec, pool| {
        monitor.observe(rec, pool)
    });
    let mut v = monitor.violations;
    if let Some(e) = &trace.error {
        v.push(e.clone());
    }
    (v, trace)
}

/// The synthetic theory suite run by `verify theorems`. Smaller than the
/// acceptance tests so it finishes in seconds.
pub fn verify_theorems(seed: u64) -> Vec<ProbeOutcome> {
    let s = |run: u64, probe: u64| derive_seed(seed, &[probe, run]);
    vec![
        probe("leader_steps_synthetic", 20, |run| {
            let curves = random_curves(50, s(run, 1));
            let mut m = InvariantMonitor::new(StrategyKind::Metamax);
            metamax_unbounded_rounds(&curves, HSchedule::TimeVarying, true, 2000, s(run, 2), |r, p| {
                m.observe(r, p)
            })?;
            Ok((m.violations, format!("{} rounds checked", m.rounds_checked)))
        }),
        probe("leader_steps_griewank", 5, |run| {
            let (v, trace) = griewank_metamax_violations(2, 3000, s(run, 3));
            Ok((v, format!("{} rounds", trace.rounds.len())))
        }),
        probe("min_steps_metamax_k", 20, |run| {
            let curves = random_curves(20, s(run, 4));
            let mut m = InvariantMonitor::new(StrategyKind::MetamaxK);
            metamax_k_rounds(&curves, HSchedule::TimeVarying, 2000, s(run, 5), |r, p| m.observe(r, p))?;
            Ok((m.violations, String::new()))
        }),
        probe("pool_growth_metamax_inf", 10, |run| {
            let curves = random_curves(10, s(run, 6));
            let mut m = InvariantMonitor::new(StrategyKind::MetamaxInf);
            metamax_unbounded_rounds(&curves, HSchedule::TimeVarying, false, 1000, s(run, 7), |r, p| {
                m.observe(r, p)
            })?;
            Ok((m.violations, String::new()))
        }),
        probe("optimal_usage_half", 5, |run| {
            let curves: Vec<SyntheticCurve> = [1.0, 1.0, 0.5, 0.5]
                .iter()
                .map(|&l| SyntheticCurve::new(l, 1.0))
                .collect();
            let states = metamax_k_rounds(&curves, HSchedule::Fixed { alpha: 0.25 }, 10_000, s(run, 8), |_, _| {})?;
            let ratio = TheoryProbe::from_curves(&curves).usage_ratio(&states);
            let v = (ratio < 0.45).then(|| format!("optimal usage {ratio:.4} < 0.45"));
            Ok((v.into_iter().collect(), format!("ratio {ratio:.4}")))
        }),
        probe("optimal_usage_groups", 5, |run| {
            let curves: Vec<SyntheticCurve> = [1.0, 0.6, 0.6, 0.6, 0.3]
                .iter()
                .map(|&l| SyntheticCurve::new(l, 1.0))
                .collect();
            let p = TheoryProbe::from_curves(&curves);
            let states = metamax_k_rounds(&curves, HSchedule::Fixed { alpha: 0.9 }, 10_000, s(run, 9), |_, _| {})?;
            let ratio = p.usage_ratio(&states);
            let bound = p.group_usage_bound().expect("suboptimal curves") - 0.05;
            let v = (ratio < bound).then(|| format!("optimal usage {ratio:.4} < {bound:.4}"));
            Ok((v.into_iter().collect(), format!("ratio {ratio:.4}")))
        }),
        probe("low_instances_per_round", 5, |run| {
            let curves: Vec<SyntheticCurve> = [1.0, 0.7, 0.5, 0.2]
                .iter()
                .map(|&l| SyntheticCurve::new(l, 0.5))
                .collect();
            let p = TheoryProbe::from_curves(&curves);
            let alpha = 0.5;
            let bound = p.low_instance_bound(alpha).expect("margin");
            let delta = p.delta.expect("margin");
            let mut prev_best = 0.0;
            let mut v = Vec::new();
            metamax_unbounded_rounds(&curves, HSchedule::Fixed { alpha }, true, 3000, s(run, 10), |rec, _| {
                if p.f_star - prev_best < delta / 2.0 {
                    let low = rec.selected.iter().filter(|&&i| p.limit(i) <= p.f_star - delta).count() as u64;
                    if low > bound {
                        v.push(format!("round {}: {low} low instances stepped > {bound}", rec.round));
                    }
                }
                prev_best = rec.best_value;
            })?;
            Ok((v, String::new()))
        }),
    ]
}
