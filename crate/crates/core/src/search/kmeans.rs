//! Lloyd's k-means as a restartable local search.
//!
//! The framework maximizes, so a k-means instance reports `-cost` through
//! its objective. One Lloyd step is charged as one evaluation.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Sample, Searcher, SearcherFactory, StepReport};
use crate::objective::{BoxBounds, Objective, ObjectiveFn, Point};
use crate::seed::derive_seed;

/// Absolute cost decrease below which a Lloyd run is considered finished.
pub const TERMINATION_THRESHOLD: f64 = 1e-9;

/// Row-major `M x d` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("dataset must have at least one row and column".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::Config(format!(
                "dataset has {} values, expected {rows} x {cols}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite value in row {}", i / cols + 1)));
        }
        Ok(Dataset { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("ragged rows".into()));
        }
        Dataset::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    /// Per-column bounding box.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.cols];
        for r in self.iter_rows() {
            for (bb, &v) in b.iter_mut().zip(r) {
                bb.0 = bb.0.min(v);
                bb.1 = bb.1.max(v);
            }
        }
        b
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest-center assignment (ties to the smaller cluster index) and the
/// resulting sum of squared distances. `centers` is row-major `N x d`.
pub fn assign(data: &Dataset, centers: &[f64]) -> (Vec<usize>, f64) {
    let d = data.cols();
    let mut cost = 0.0;
    let assignment = data
        .iter_rows()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (k, c) in centers.chunks_exact(d).enumerate() {
                let dist = sq_dist(x, c);
                if dist < best.1 {
                    best = (k, dist);
                }
            }
            cost += best.1;
            best.0
        })
        .collect();
    (assignment, cost)
}

/// Sum of squared distances from each row to its nearest center.
pub fn clustering_cost(data: &Dataset, centers: &[f64]) -> f64 {
    assign(data, centers).1
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansState {
    /// Row-major `N x d`.
    pub centers: Vec<f64>,
    pub n_clusters: usize,
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub terminated: bool,
}

impl KmeansState {
    pub fn new(data: &Dataset, centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || !centers.len().is_multiple_of(data.cols()) {
            return Err(Error::DimensionMismatch {
                expected: data.cols(),
                got: centers.len(),
            });
        }
        let (assignment, cost) = assign(data, &centers);
        Ok(KmeansState {
            n_clusters: centers.len() / data.cols(),
            centers,
            assignment,
            cost,
            terminated: false,
        })
    }

    pub fn center(&self, k: usize, d: usize) -> &[f64] {
        &self.centers[k * d..(k + 1) * d]
    }
}

/// One Lloyd iteration: move every non-empty cluster's center to the mean of
/// its members, then reassign rows to their nearest new center.
pub fn lloyd_step(state: &KmeansState, data: &Dataset) -> Result<KmeansState> {
    lloyd_step_with_threshold(state, data, TERMINATION_THRESHOLD)
}

pub fn lloyd_step_with_threshold(state: &KmeansState, data: &Dataset, threshold: f64) -> Result<KmeansState> {
    if state.terminated {
        return Err(Error::Contract("lloyd_step on terminated k-means state".into()));
    }
    let d = data.cols();
    let mut sums = vec![0.0; state.centers.len()];
    let mut counts = vec![0usize; state.n_clusters];
    for (x, &k) in data.iter_rows().zip(&state.assignment) {
        counts[k] += 1;
        for (s, v) in sums[k * d..(k + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut centers = state.centers.clone();
    for k in 0..state.n_clusters {
        // an empty cluster keeps its center
        if counts[k] > 0 {
            let inv = counts[k] as f64;
            for (c, s) in centers[k * d..(k + 1) * d].iter_mut().zip(&sums[k * d..(k + 1) * d]) {
                *c = s / inv;
            }
        }
    }
    let (assignment, cost) = assign(data, &centers);
    Ok(KmeansState {
        centers,
        n_clusters: state.n_clusters,
        assignment,
        terminated: state.cost - cost < threshold,
        cost,
    })
}

/// `n` distinct rows chosen uniformly without replacement, row-major.
pub fn kmeans_init_uniform(data: &Dataset, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    check_cluster_count(data, n)?;
    Ok(index::sample(rng, data.rows(), n)
        .into_iter()
        .flat_map(|i| data.row(i).iter().copied())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedWeighting {
    /// Squared distance to the nearest chosen center (k-means++).
    #[default]
    Squared,
    Linear,
}

/// k-means++ seeding. The first center is a uniform row; each further row is
/// drawn with probability proportional to its (squared) distance to the
/// nearest chosen center. If every remaining weight is zero the draw falls
/// back to a uniform choice among rows not yet chosen.
pub fn kmeans_init_pp(data: &Dataset, n: usize, weighting: SeedWeighting, rng: &mut impl Rng) -> Result<Vec<f64>> {
    check_cluster_count(data, n)?;
    let m = data.rows();
    let mut chosen = Vec::with_capacity(n);
    let mut taken = vec![false; m];
    let first = rng.random_range(0..m);
    chosen.push(first);
    taken[first] = true;
    let mut nearest: Vec<f64> = data.iter_rows().map(|x| sq_dist(x, data.row(first))).collect();
    while chosen.len() < n {
        let weight = |j: usize| -> f64 {
            if taken[j] {
                return 0.0;
            }
            match weighting {
                SeedWeighting::Squared => nearest[j],
                SeedWeighting::Linear => nearest[j].sqrt(),
            }
        };
        let total: f64 = (0..m).map(weight).sum();
        let next = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for j in 0..m {
                let w = weight(j);
                acc += w;
                if w > 0.0 && acc > r {
                    pick = Some(j);
                    break;
                }
            }
            // rounding can leave r at the very top of the range
            pick.unwrap_or_else(|| (0..m).rev().find(|&j| weight(j) > 0.0).unwrap())
        } else {
            let free: Vec<usize> = (0..m).filter(|&j| !taken[j]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let c = data.row(next);
        for (j, x) in data.iter_rows().enumerate() {
            nearest[j] = nearest[j].min(sq_dist(x, c));
        }
    }
    Ok(chosen.into_iter().flat_map(|i| data.row(i).iter().copied()).collect())
}

fn check_cluster_count(data: &Dataset, n: usize) -> Result<()> {
    if n == 0 || n > data.rows() {
        return Err(Error::Config(format!(
            "cannot choose {n} centers from {} rows",
            data.rows()
        )));
    }
    Ok(())
}

/// `-cost(centers)` over a fixed dataset, with centers flattened row-major.
#[derive(Debug, Clone)]
pub struct ClusteringObjective {
    data: Arc<Dataset>,
}

impl ClusteringObjective {
    pub fn new(data: Arc<Dataset>) -> Self {
        ClusteringObjective { data }
    }

    /// Box for `n` centers: the data's bounding box, repeated.
    pub fn bounds(data: &Dataset, n: usize) -> BoxBounds {
        BoxBounds::new(data.bounding_box().repeat(n)).expect("finite dataset")
    }

    /// An upper bound on the cost of any center set inside the data's convex
    /// hull: each row is at most its farthest-row distance from a center.
    pub fn cost_bound(data: &Dataset) -> f64 {
        data.iter_rows()
            .map(|x| data.iter_rows().map(|y| sq_dist(x, y)).fold(0.0, f64::max))
            .sum()
    }

    /// Wraps into an [`Objective`] whose shifted values are non-negative.
    pub fn into_objective(self, n: usize) -> Objective {
        let bounds = Self::bounds(&self.data, n);
        let shift = Self::cost_bound(&self.data);
        Objective::new(self, bounds).with_shift(shift)
    }
}

impl ObjectiveFn for ClusteringObjective {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        Ok(-clustering_cost(&self.data, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmeansInit {
    Uniform,
    #[default]
    #[serde(alias = "kmeans++")]
    PlusPlus,
}

/// A k-means instance. The first step seeds the centers; each later step is
/// one Lloyd iteration. The instance terminates once the cost stops
/// decreasing by at least the threshold.
#[derive(Debug, Clone)]
pub struct Kmeans {
    data: Arc<Dataset>,
    n_clusters: usize,
    init: KmeansInit,
    weighting: SeedWeighting,
    threshold: f64,
    rng: ChaCha8Rng,
    state: Option<KmeansState>,
}

impl Kmeans {
    pub fn new(data: Arc<Dataset>, n_clusters: usize, init: KmeansInit, seed: u64) -> Self {
        Kmeans {
            data,
            n_clusters,
            init,
            weighting: SeedWeighting::Squared,
            threshold: TERMINATION_THRESHOLD,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: None,
        }
    }

    pub fn with_weighting(mut self, weighting: SeedWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn state(&self) -> Option<&KmeansState> {
        self.state.as_ref()
    }

    fn evaluate(&self, objective: &mut Objective, centers: &[f64]) -> Result<Sample> {
        let mut x = centers.to_vec();
        // means can drift an ulp past the bounding box
        objective.bounds().clamp(&mut x);
        let value = objective.evaluate(&x)?;
        Ok(Sample {
            point: Point::new(x),
            value,
        })
    }
}

impl Searcher for Kmeans {
    fn next_step_cost(&self) -> usize {
        1
    }

    fn step(&mut self, objective: &mut Objective) -> Result<StepReport> {
        let next = match &self.state {
            None => {
                let centers = match self.init {
                    KmeansInit::Uniform => kmeans_init_uniform(&self.data, self.n_clusters, &mut self.rng)?,
                    KmeansInit::PlusPlus => kmeans_init_pp(&self.data, self.n_clusters, self.weighting, &mut self.rng)?,
                };
                KmeansState::new(&self.data, centers)?
            }
            Some(s) => lloyd_step_with_threshold(s, &self.data, self.threshold)?,
        };
        let sample = self.evaluate(objective, &next.centers)?;
        let terminated = next.terminated;
        self.state = Some(next);
        Ok(StepReport {
            samples: vec![sample],
            evals: 1,
            terminated,
        })
    }

    fn is_terminated(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.terminated)
    }
}

#[derive(Debug, Clone)]
pub struct KmeansFactory {
    pub data: Arc<Dataset>,
    pub n_clusters: usize,
    pub init: KmeansInit,
    pub weighting: SeedWeighting,
    pub seed: u64,
}

impl SearcherFactory for KmeansFactory {
    fn spawn(&mut self, id: usize) -> Result<Box<dyn Searcher>> {
        Ok(Box::new(
            Kmeans::new(
                self.data.clone(),
                self.n_clusters,
                self.init,
                derive_seed(self.seed, &[id as u64]),
            )
            .with_weighting(self.weighting),
        ))
    }
}
