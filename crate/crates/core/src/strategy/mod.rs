//! Multi-start allocation strategies.
//!
//! Every strategy drives a pool of local search instances against a budget
//! of raw objective evaluations. A step whose cost would overrun the budget
//! is never started, so a run may end a few evaluations short of it.

mod baselines;
mod metamax;
mod thrasc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{luby_length, unif_select, Explorer};
pub use metamax::{leader_by_index, leader_by_steps, MetaMaxK, MetaMaxUnbounded, RoundStatus};
pub use thrasc::{thrasc_index, thrasc_select, ThrascState};

use crate::error::{Error, Result};
use crate::hull::HSchedule;
use crate::instance::{Instance, RoundRecord, RunTrace, SearcherFactory, StepReport};
use crate::objective::Objective;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    MetamaxK,
    MetamaxInf,
    Metamax,
    Unif,
    Thrasc,
    Rand,
    Luby,
    EeUnif,
    EeLuby,
    Serial,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 10] = [
        StrategyKind::MetamaxK,
        StrategyKind::MetamaxInf,
        StrategyKind::Metamax,
        StrategyKind::Unif,
        StrategyKind::Thrasc,
        StrategyKind::Rand,
        StrategyKind::Luby,
        StrategyKind::EeUnif,
        StrategyKind::EeLuby,
        StrategyKind::Serial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::MetamaxK => "metamax_k",
            StrategyKind::MetamaxInf => "metamax_inf",
            StrategyKind::Metamax => "metamax",
            StrategyKind::Unif => "unif",
            StrategyKind::Thrasc => "thrasc",
            StrategyKind::Rand => "rand",
            StrategyKind::Luby => "luby",
            StrategyKind::EeUnif => "ee_unif",
            StrategyKind::EeLuby => "ee_luby",
            StrategyKind::Serial => "serial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let norm = match norm.as_str() {
            "metamax(k)" => "metamax_k",
            "metamax(inf)" | "metamax_infinity" => "metamax_inf",
            other => other,
        };
        Self::ALL.into_iter().find(|k| k.name() == norm)
    }

    /// Strategies whose pool uses a fixed instance count `K`.
    pub fn uses_fixed_pool(self) -> bool {
        matches!(
            self,
            StrategyKind::MetamaxK | StrategyKind::Unif | StrategyKind::Thrasc | StrategyKind::EeUnif
        )
    }

    /// Strategies that add one instance per round.
    pub fn grows_pool(self) -> bool {
        matches!(self, StrategyKind::MetamaxInf | StrategyKind::Metamax)
    }

    pub fn is_metamax(self) -> bool {
        self.grows_pool() || self == StrategyKind::MetamaxK
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_k() -> usize {
    100
}
fn default_s() -> usize {
    100
}
fn default_delta() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Evaluation budget `T`. Zero means "inherit from the experiment".
    #[serde(default)]
    pub budget: u64,
    #[serde(default)]
    pub h: HSchedule,
    #[serde(default = "default_s")]
    pub thrasc_s: usize,
    #[serde(default = "default_delta")]
    pub thrasc_delta: f64,
    /// Display name; defaults to the kind's name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, budget: u64) -> Self {
        StrategyConfig {
            kind,
            k: default_k(),
            budget,
            h: HSchedule::default(),
            thrasc_s: default_s(),
            thrasc_delta: default_delta(),
            label: None,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_h(mut self, h: HSchedule) -> Self {
        self.h = h;
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.kind.uses_fixed_pool() && self.k < 1 {
            return Err(Error::Config(format!("{} needs K >= 1", self.kind)));
        }
        if self.kind == StrategyKind::Thrasc {
            if self.thrasc_s < 1 {
                return Err(Error::Config("THRASC needs s >= 1".into()));
            }
            if !(self.thrasc_delta > 0.0 && self.thrasc_delta < 1.0) {
                return Err(Error::Config("THRASC delta must lie in (0, 1)".into()));
            }
        }
        if matches!(self.kind, StrategyKind::EeUnif | StrategyKind::EeLuby) && self.budget < 2 {
            return Err(Error::Config("explore-and-exploit needs a budget of at least 2".into()));
        }
        self.h.validate()
    }
}

/// Shared state of one strategy run: the objective, the instance factory,
/// the budget and the growing trace.
pub struct RunContext<'a> {
    pub objective: &'a mut Objective,
    factory: &'a mut dyn SearcherFactory,
    pub budget: u64,
    pub trace: RunTrace,
    best: Option<f64>,
    spawned: usize,
}

impl<'a> RunContext<'a> {
    pub fn new(
        objective: &'a mut Objective,
        factory: &'a mut dyn SearcherFactory,
        budget: u64,
        trace: RunTrace,
    ) -> Self {
        RunContext {
            objective,
            factory,
            budget,
            trace,
            best: None,
            spawned: 0,
        }
    }

    /// A fresh instance with the given pool index.
    pub fn spawn(&mut self, id: usize) -> Result<Instance> {
        let seq = self.spawned;
        self.spawned += 1;
        Ok(Instance::new(id, self.factory.spawn(seq)?))
    }

    pub fn spawned(&self) -> usize {
        self.spawned
    }

    pub fn fits(&self, inst: &Instance) -> bool {
        self.objective.eval_count() + inst.next_step_cost() as u64 <= self.budget
    }

    /// Steps `inst` once if the step fits in the budget. Returns `false`
    /// without touching anything otherwise.
    pub fn step(&mut self, inst: &mut Instance) -> Result<bool> {
        Ok(self.step_with_report(inst)?.is_some())
    }

    /// Like [`RunContext::step`] but hands back the searcher's report.
    pub fn step_with_report(&mut self, inst: &mut Instance) -> Result<Option<StepReport>> {
        if !self.fits(inst) {
            return Ok(None);
        }
        let report = inst.step(self.objective)?;
        let v = inst.state.best_value;
        if self.best.is_none_or(|b| v > b) {
            self.best = Some(v);
        }
        let best = self.objective.unshift(self.best.expect("set above"));
        self.trace.checkpoints.push((self.objective.eval_count(), best));
        Ok(Some(report))
    }

    pub fn best_raw(&self) -> Option<f64> {
        self.best.map(|b| self.objective.unshift(b))
    }
}

/// Callback invoked after every completed round of a METAMAX-type strategy.
pub type RoundObserver<'o> = &'o mut dyn FnMut(&RoundRecord, &[Instance]);

/// Runs `config` until the budget is spent or every instance has terminated.
/// Failures mark the returned trace invalid; the partial trace is kept.
pub fn run_strategy(
    config: &StrategyConfig,
    objective: &mut Objective,
    factory: &mut dyn SearcherFactory,
    seed: u64,
) -> RunTrace {
    run_strategy_observed(config, objective, factory, seed, &mut |_, _| {})
}

pub fn run_strategy_observed(
    config: &StrategyConfig,
    objective: &mut Objective,
    factory: &mut dyn SearcherFactory,
    seed: u64,
    observer: RoundObserver<'_>,
) -> RunTrace {
    let trace = RunTrace::new(config.label(), seed);
    if let Err(e) = config.validate() {
        let mut trace = trace;
        trace.valid = false;
        trace.error = Some(e.to_string());
        return trace;
    }
    let mut ctx = RunContext::new(objective, factory, config.budget, trace);
    let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x71e]));
    let outcome = drive(config, &mut ctx, rng, observer);
    let mut trace = ctx.trace;
    match outcome {
        Ok(()) | Err(Error::Exhausted) => {}
        Err(e) => {
            trace.valid = false;
            trace.error = Some(e.to_string());
        }
    }
    trace
}

fn drive(
    config: &StrategyConfig,
    ctx: &mut RunContext<'_>,
    rng: ChaCha8Rng,
    observer: RoundObserver<'_>,
) -> Result<()> {
    match config.kind {
        StrategyKind::MetamaxK => {
            let mut s = MetaMaxK::new(config.k, config.h, rng);
            if !s.initialize(ctx)? {
                return Ok(());
            }
            loop {
                match s.round(ctx)? {
                    RoundStatus::Completed(rec) => {
                        observer(&rec, s.pool());
                        ctx.trace.rounds.push(rec);
                    }
                    RoundStatus::OutOfBudget | RoundStatus::Exhausted => return Ok(()),
                }
            }
        }
        StrategyKind::MetamaxInf | StrategyKind::Metamax => {
            let catch_up = config.kind == StrategyKind::Metamax;
            let mut s = MetaMaxUnbounded::new(config.h, catch_up, rng);
            loop {
                match s.round(ctx)? {
                    RoundStatus::Completed(rec) => {
                        observer(&rec, s.pool());
                        ctx.trace.rounds.push(rec);
                    }
                    RoundStatus::OutOfBudget | RoundStatus::Exhausted => return Ok(()),
                }
            }
        }
        StrategyKind::Unif => baselines::run_unif(ctx, config.k).map(|_| ()),
        StrategyKind::Thrasc => thrasc::run_thrasc(ctx, config.k, config.thrasc_s, config.thrasc_delta),
        StrategyKind::Rand => baselines::run_rand(ctx),
        StrategyKind::Luby => baselines::run_luby(ctx).map(|_| ()),
        StrategyKind::EeUnif => baselines::run_explore_exploit(ctx, Explorer::Unif(config.k)),
        StrategyKind::EeLuby => baselines::run_explore_exploit(ctx, Explorer::Luby),
        StrategyKind::Serial => baselines::run_serial(ctx, None).map(|_| ()),
    }
}
