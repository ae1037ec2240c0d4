//! Simultaneous perturbation stochastic approximation (gradient ascent).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Sample, Searcher, SearcherFactory, StepReport};
use crate::objective::{BoxBounds, Objective, Point};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaParams {
    pub a: f64,
    /// Stability constant `A` of the gain sequence.
    pub stability: f64,
    pub alpha: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl Default for SpsaParams {
    fn default() -> Self {
        SpsaParams {
            a: 0.05,
            stability: 60.0,
            alpha: 0.602,
            phi: 0.1,
            gamma: 0.101,
        }
    }
}

impl SpsaParams {
    pub fn new(a: f64, phi: f64) -> Self {
        SpsaParams {
            a,
            phi,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.phi > 0.0) {
            return Err(Error::Config(format!(
                "SPSA gains must be positive (a = {}, phi = {})",
                self.a, self.phi
            )));
        }
        if !(self.alpha > 0.0 && self.gamma > 0.0 && self.stability >= 0.0) {
            return Err(Error::Config("SPSA exponents must be positive".into()));
        }
        Ok(())
    }
}

/// Step size `a_t` and perturbation size `phi_t` at iteration `t`.
pub fn spsa_gains(p: &SpsaParams, t: u64) -> (f64, f64) {
    let t = t as f64;
    (
        p.a / (p.stability + t + 1.0).powf(p.alpha),
        p.phi / (t + 1.0).powf(p.gamma),
    )
}

/// Two-sided simultaneous perturbation estimate of the gradient at `x`.
///
/// `delta` holds the ±1 perturbation directions. Perturbed points are
/// projected onto `bounds`; the quotient always uses the nominal `phi`.
/// Returns the estimate together with the two evaluations.
pub fn gradient_estimate(
    objective: &mut Objective,
    x: &[f64],
    phi: f64,
    delta: &[f64],
) -> Result<(Vec<f64>, [Sample; 2])> {
    let bounds = objective.bounds().clone();
    let mut plus: Vec<f64> = x.iter().zip(delta).map(|(v, b)| v + phi * b).collect();
    let mut minus: Vec<f64> = x.iter().zip(delta).map(|(v, b)| v - phi * b).collect();
    bounds.clamp(&mut plus);
    bounds.clamp(&mut minus);
    let y_plus = objective.evaluate(&plus)?;
    let y_minus = objective.evaluate(&minus)?;
    let diff = y_plus - y_minus;
    let grad = delta.iter().map(|b| diff / (2.0 * phi * b)).collect();
    Ok((
        grad,
        [
            Sample {
                point: Point::new(plus),
                value: y_plus,
            },
            Sample {
                point: Point::new(minus),
                value: y_minus,
            },
        ],
    ))
}

/// Symmetric Bernoulli ±1 direction.
pub fn rademacher(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// One SPSA instance. Its first step evaluates a uniformly random starting
/// point; every later step costs three evaluations (two perturbed probes and
/// the updated iterate).
#[derive(Debug, Clone)]
pub struct Spsa {
    params: SpsaParams,
    bounds: BoxBounds,
    x: Option<Point>,
    t: u64,
    rng: ChaCha8Rng,
}

impl Spsa {
    pub fn new(params: SpsaParams, bounds: BoxBounds, seed: u64) -> Self {
        Spsa {
            params,
            bounds,
            x: None,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Starts from a fixed point instead of a random one.
    pub fn starting_at(params: SpsaParams, bounds: BoxBounds, x: Point, seed: u64) -> Self {
        let mut s = Spsa::new(params, bounds, seed);
        s.x = Some(x);
        s
    }

    pub fn current(&self) -> Option<&Point> {
        self.x.as_ref()
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    fn random_start(&mut self) -> Point {
        let bounds = self.bounds.bounds().to_vec();
        Point::new(
            bounds
                .iter()
                .map(|&(lo, hi)| if lo == hi { lo } else { self.rng.random_range(lo..=hi) })
                .collect(),
        )
    }
}

impl Searcher for Spsa {
    fn next_step_cost(&self) -> usize {
        if self.x.is_none() {
            1
        } else {
            3
        }
    }

    fn step(&mut self, objective: &mut Objective) -> Result<StepReport> {
        let Some(x) = self.x.clone() else {
            let x0 = self.random_start();
            let v = objective.evaluate(&x0)?;
            self.x = Some(x0.clone());
            return Ok(StepReport {
                samples: vec![Sample { point: x0, value: v }],
                evals: 1,
                terminated: false,
            });
        };
        let (a_t, phi_t) = spsa_gains(&self.params, self.t);
        let delta = rademacher(&mut self.rng, x.len());
        let (grad, probes) = gradient_estimate(objective, &x, phi_t, &delta)?;
        let mut next: Vec<f64> = x.iter().zip(&grad).map(|(v, g)| v + a_t * g).collect();
        self.bounds.clamp(&mut next);
        let next = Point::new(next);
        let v = objective.evaluate(&next)?;
        self.x = Some(next.clone());
        self.t += 1;
        let [p, m] = probes;
        Ok(StepReport {
            samples: vec![p, m, Sample { point: next, value: v }],
            evals: 3,
            terminated: false,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpsaFactory {
    pub params: SpsaParams,
    pub bounds: BoxBounds,
    pub seed: u64,
}

impl SearcherFactory for SpsaFactory {
    fn spawn(&mut self, id: usize) -> Result<Box<dyn Searcher>> {
        Ok(Box::new(Spsa::new(
            self.params,
            self.bounds.clone(),
            derive_seed(self.seed, &[id as u64]),
        )))
    }
}
