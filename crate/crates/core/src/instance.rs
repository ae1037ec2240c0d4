//! Local search instances and per-run bookkeeping.

use crate::error::{Error, Result};
use crate::objective::{Objective, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    Terminated,
}

/// Bookkeeping for one local search instance: step count and best-so-far
/// estimate. Values are in shifted (non-negative) units.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceState {
    pub id: usize,
    pub n: u64,
    pub best_value: f64,
    pub best_point: Option<Point>,
    pub status: Status,
}

impl InstanceState {
    /// A fresh instance that has not taken any step. Its estimate starts at
    /// zero, which is a lower bound for every shifted objective value.
    pub fn new(id: usize) -> Self {
        InstanceState {
            id,
            n: 0,
            best_value: 0.0,
            best_point: None,
            status: Status::Active,
        }
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    /// Counts one step whose best sample was `(x, v)`. Only a strict
    /// improvement replaces the estimate, so ties keep the earliest maximizer.
    pub fn record_best(&mut self, x: &Point, v: f64) -> Result<()> {
        if !self.is_active() {
            return Err(Error::Contract(format!(
                "record_best on terminated instance {}",
                self.id
            )));
        }
        self.n += 1;
        if v > self.best_value || self.best_point.is_none() {
            self.best_value = v;
            self.best_point = Some(x.clone());
        }
        Ok(())
    }
}

/// One objective evaluation made by a searcher (value already shifted).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub samples: Vec<Sample>,
    pub evals: usize,
    pub terminated: bool,
}

impl StepReport {
    /// First maximal sample, matching the smallest-index argmax convention.
    pub fn best(&self) -> Option<&Sample> {
        let mut best: Option<&Sample> = None;
        for s in &self.samples {
            if best.is_none_or(|b| s.value > b.value) {
                best = Some(s);
            }
        }
        best
    }
}

/// A local search algorithm with its own internal state.
///
/// One call to [`Searcher::step`] is one step of the sampling function. A
/// step may spend several objective evaluations; strategies check
/// [`Searcher::next_step_cost`] against the remaining budget before stepping.
pub trait Searcher: Send {
    fn next_step_cost(&self) -> usize;

    fn step(&mut self, objective: &mut Objective) -> Result<StepReport>;

    fn is_terminated(&self) -> bool {
        false
    }
}

/// Creates independently seeded searchers on demand.
pub trait SearcherFactory {
    fn spawn(&mut self, id: usize) -> Result<Box<dyn Searcher>>;
}

impl<F> SearcherFactory for F
where
    F: FnMut(usize) -> Result<Box<dyn Searcher>>,
{
    fn spawn(&mut self, id: usize) -> Result<Box<dyn Searcher>> {
        self(id)
    }
}

pub struct Instance {
    pub state: InstanceState,
    searcher: Box<dyn Searcher>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance").field("state", &self.state).finish()
    }
}

impl Instance {
    pub fn new(id: usize, searcher: Box<dyn Searcher>) -> Self {
        Instance {
            state: InstanceState::new(id),
            searcher,
        }
    }

    pub fn next_step_cost(&self) -> usize {
        self.searcher.next_step_cost()
    }

    pub fn step(&mut self, objective: &mut Objective) -> Result<StepReport> {
        let before = objective.eval_count();
        let report = self.searcher.step(objective)?;
        debug_assert_eq!(objective.eval_count() - before, report.evals as u64);
        match report.best() {
            Some(s) => self.state.record_best(&s.point, s.value)?,
            None => {
                return Err(Error::Contract(format!(
                    "instance {} stepped without evaluating",
                    self.state.id
                )))
            }
        }
        if report.terminated || self.searcher.is_terminated() {
            self.state.status = Status::Terminated;
        }
        Ok(report)
    }
}

/// Summary of one completed round of a METAMAX-type strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub selected: Vec<usize>,
    pub leader: usize,
    pub leader_steps: u64,
    pub total_steps: u64,
    /// Best value in the objective's own (unshifted) units.
    pub best_value: f64,
    pub evals: u64,
    pub pool_size: usize,
}

/// Best-so-far value after each step, in objective units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub strategy: String,
    pub seed: u64,
    pub checkpoints: Vec<(u64, f64)>,
    pub rounds: Vec<RoundRecord>,
    pub valid: bool,
    pub error: Option<String>,
}

impl RunTrace {
    pub fn new(strategy: impl Into<String>, seed: u64) -> Self {
        RunTrace {
            strategy: strategy.into(),
            seed,
            checkpoints: Vec::new(),
            rounds: Vec::new(),
            valid: true,
            error: None,
        }
    }

    pub fn final_best(&self) -> Option<f64> {
        self.checkpoints.last().map(|&(_, v)| v)
    }

    /// Best-so-far at the largest recorded evaluation count not above `evals`.
    pub fn best_at(&self, evals: u64) -> Option<f64> {
        let idx = self.checkpoints.partition_point(|&(e, _)| e <= evals);
        if idx == 0 {
            None
        } else {
            Some(self.checkpoints[idx - 1].1)
        }
    }
}
