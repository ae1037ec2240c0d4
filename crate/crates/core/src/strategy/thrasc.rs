//! Threshold Ascent over a fixed pool.
//!
//! Every evaluation's (shifted) value is one reward. For each instance the
//! rule counts how many of its rewards are among the `s` best seen so far
//! and pulls the instance with the largest upper bound on that rate.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::RunContext;
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Upper confidence index `U(mu, n) = mu + (alpha + sqrt(2 n mu alpha + alpha^2)) / n`.
pub fn thrasc_index(mu: f64, n: u64, alpha: f64) -> f64 {
    let n = n as f64;
    mu + (alpha + (2.0 * n * mu * alpha + alpha * alpha).sqrt()) / n
}

#[derive(Debug, Clone, Copy)]
struct Reward {
    value: f64,
    seq: u64,
    instance: usize,
}

// Rank: higher value first, then earlier arrival.
impl Ord for Reward {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Reward {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Reward {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Reward {}

#[derive(Debug, Clone)]
pub struct ThrascState {
    pulls: Vec<u64>,
    top_counts: Vec<u64>,
    top: BinaryHeap<Reverse<Reward>>,
    s: usize,
    alpha: f64,
    seq: u64,
}

impl ThrascState {
    /// `alpha = ln(2 T K / delta)`.
    pub fn new(k: usize, s: usize, budget: u64, delta: f64) -> Self {
        let alpha = (2.0 * budget as f64 * k as f64 / delta).ln();
        Self::with_alpha(k, s, alpha)
    }

    pub fn with_alpha(k: usize, s: usize, alpha: f64) -> Self {
        ThrascState {
            pulls: vec![0; k],
            top_counts: vec![0; k],
            top: BinaryHeap::with_capacity(s + 1),
            s,
            alpha,
            seq: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    /// `S_i`: how many of instance `i`'s rewards are among the top `s`.
    pub fn top_counts(&self) -> &[u64] {
        &self.top_counts
    }

    pub fn record_pull(&mut self, instance: usize) {
        self.pulls[instance] += 1;
    }

    pub fn observe(&mut self, instance: usize, value: f64) {
        let r = Reward {
            value,
            seq: self.seq,
            instance,
        };
        self.seq += 1;
        if self.top.len() < self.s {
            self.top.push(Reverse(r));
            self.top_counts[instance] += 1;
            return;
        }
        let Reverse(worst) = *self.top.peek().expect("s >= 1");
        if r > worst {
            self.top.pop();
            self.top_counts[worst.instance] -= 1;
            self.top.push(Reverse(r));
            self.top_counts[instance] += 1;
        }
    }
}

/// Instance with the largest index `U(S_i / n_i, n_i)` among `eligible`
/// (all instances when `None`); ties go to the smallest index.
pub fn thrasc_select(state: &ThrascState, eligible: Option<&[bool]>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (&n, &s)) in state.pulls.iter().zip(&state.top_counts).enumerate() {
        if eligible.is_some_and(|e| !e[i]) {
            continue;
        }
        if n == 0 {
            return Err(Error::Contract(format!("THRASC instance {i} was never pulled")));
        }
        let u = thrasc_index(s as f64 / n as f64, n, state.alpha);
        if best.is_none_or(|(_, bu)| u > bu) {
            best = Some((i, u));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Exhausted)
}

pub(super) fn run_thrasc(ctx: &mut RunContext<'_>, k: usize, s: usize, delta: f64) -> Result<()> {
    let mut pool = (0..k).map(|id| ctx.spawn(id)).collect::<Result<Vec<_>>>()?;
    let mut state = ThrascState::new(k, s, ctx.budget, delta);
    for i in 0..k {
        if !step_and_observe(ctx, &mut pool, &mut state, i)? {
            return Ok(());
        }
    }
    loop {
        let eligible: Vec<bool> = pool.iter().map(|p| p.state.is_active()).collect();
        let i = thrasc_select(&state, Some(&eligible))?;
        if !step_and_observe(ctx, &mut pool, &mut state, i)? {
            return Ok(());
        }
    }
}

fn step_and_observe(
    ctx: &mut RunContext<'_>,
    pool: &mut [Instance],
    state: &mut ThrascState,
    i: usize,
) -> Result<bool> {
    match ctx.step_with_report(&mut pool[i])? {
        None => Ok(false),
        Some(report) => {
            state.record_pull(i);
            for s in &report.samples {
                state.observe(i, s.value);
            }
            Ok(true)
        }
    }
}
