//! Deterministic convergence curves standing in for real local searchers.
//!
//! The objective is the identity `f(x) = x_0` on `[0, L]` where `L` is the
//! largest limit, so a searcher "samples" its curve value directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Sample, Searcher, SearcherFactory, StepReport};
use crate::objective::{BoxBounds, Objective, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCurve {
    pub limit: f64,
    pub rate: f64,
}

impl SyntheticCurve {
    pub fn new(limit: f64, rate: f64) -> Self {
        SyntheticCurve { limit, rate }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.limit.is_finite() && self.limit >= 0.0) {
            return Err(Error::Config(format!(
                "curve limit {} must be finite and >= 0",
                self.limit
            )));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::Config(format!("curve rate {} must be positive", self.rate)));
        }
        Ok(())
    }
}

/// `limit * (1 - exp(-rate * n))`.
pub fn synthetic_step(curve: &SyntheticCurve, n: u64) -> f64 {
    -curve.limit * (-curve.rate * n as f64).exp_m1()
}

fn upper(curves: &[SyntheticCurve]) -> f64 {
    curves
        .iter()
        .map(|c| c.limit)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
}

/// Identity objective on the range of the curves; its maximum is the
/// largest limit.
pub fn synthetic_objective(curves: &[SyntheticCurve]) -> Objective {
    let hi = upper(curves);
    Objective::new(|x: &[f64]| x[0], BoxBounds::cube(1, 0.0, hi)).with_known_max(hi)
}

/// Follows one curve; one evaluation per step, never terminates.
#[derive(Debug, Clone)]
pub struct SyntheticSearcher {
    curve: SyntheticCurve,
    n: u64,
}

impl SyntheticSearcher {
    pub fn new(curve: SyntheticCurve) -> Self {
        SyntheticSearcher { curve, n: 0 }
    }
}

impl Searcher for SyntheticSearcher {
    fn next_step_cost(&self) -> usize {
        1
    }

    fn step(&mut self, objective: &mut Objective) -> Result<StepReport> {
        self.n += 1;
        let x = synthetic_step(&self.curve, self.n);
        let value = objective.evaluate(&[x])?;
        Ok(StepReport {
            samples: vec![Sample {
                point: Point::new(vec![x]),
                value,
            }],
            evals: 1,
            terminated: false,
        })
    }
}

/// Instance `i` follows `curves[i % curves.len()]`.
#[derive(Debug, Clone)]
pub struct SyntheticFactory {
    pub curves: Vec<SyntheticCurve>,
}

impl SearcherFactory for SyntheticFactory {
    fn spawn(&mut self, id: usize) -> Result<Box<dyn Searcher>> {
        if self.curves.is_empty() {
            return Err(Error::Config("synthetic benchmark needs at least one curve".into()));
        }
        Ok(Box::new(SyntheticSearcher::new(self.curves[id % self.curves.len()])))
    }
}
