//! Objective functions and evaluation accounting.
//!
//! Every strategy maximizes. An [`Objective`] wraps a raw function with its
//! box constraints, a monotone evaluation counter and a non-negative shift so
//! that the values seen by the allocation strategies are never below zero.

use std::fmt;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A point in the search space.
#[derive(Clone, PartialEq, Default)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Closed per-coordinate interval constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds(Vec<(f64, f64)>);

impl BoxBounds {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Config("box must have at least one coordinate".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("invalid bounds [{lo}, {hi}] for coordinate {i}")));
            }
        }
        Ok(BoxBounds(bounds))
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        BoxBounds(vec![(lo, hi); d])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.0.len() && x.iter().zip(&self.0).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Coordinate-wise projection onto the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.0) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: x.len(),
            });
        }
        for (index, (&value, &(lower, upper))) in x.iter().zip(&self.0).enumerate() {
            // NaN fails both comparisons and is rejected here too.
            if !(value >= lower && value <= upper) {
                return Err(Error::OutOfBox {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }
}

/// A raw objective function. Implementations do not validate their input;
/// [`Objective::evaluate`] does that before calling in.
pub trait ObjectiveFn: Send {
    fn value(&mut self, x: &[f64]) -> Result<f64>;
}

impl<F> ObjectiveFn for F
where
    F: FnMut(&[f64]) -> f64 + Send,
{
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

pub struct Objective {
    func: Box<dyn ObjectiveFn>,
    bounds: BoxBounds,
    eval_count: u64,
    known_max: Option<f64>,
    shift: f64,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("dimension", &self.dimension())
            .field("eval_count", &self.eval_count)
            .field("known_max", &self.known_max)
            .field("shift", &self.shift)
            .finish()
    }
}

impl Objective {
    pub fn new(func: impl ObjectiveFn + 'static, bounds: BoxBounds) -> Self {
        Objective {
            func: Box::new(func),
            bounds,
            eval_count: 0,
            known_max: None,
            shift: 0.0,
        }
    }

    pub fn with_known_max(mut self, known_max: f64) -> Self {
        self.known_max = Some(known_max);
        self
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn known_max(&self) -> Option<f64> {
        self.known_max
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Evaluates `f(x) + shift`. Invalid points are rejected before the
    /// function is called and do not count as evaluations.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.bounds.check(x)?;
        self.eval_count += 1;
        let v = self.func.value(x)?;
        if v.is_nan() {
            return Err(Error::Evaluation(format!("objective returned NaN at {x:?}")));
        }
        Ok(v + self.shift)
    }

    /// Converts a shifted value back to the objective's own units.
    pub fn unshift(&self, v: f64) -> f64 {
        v - self.shift
    }
}
