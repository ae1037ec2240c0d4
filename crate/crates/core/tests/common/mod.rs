//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use metamax::instance::{InstanceState, Status};

pub fn state(id: usize, n: u64, f: f64) -> InstanceState {
    InstanceState {
        id,
        n,
        best_value: f,
        best_point: None,
        status: Status::Active,
    }
}

/// `count` log-spaced values of `c` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Instances `i` for which some `c` in `grid` makes `f_i + c h_i` strictly
/// larger than `f_j + c h_j` for every `j` in a different state.
pub fn csweep(points: &[(u64, f64, f64)], grid: &[f64]) -> Vec<bool> {
    let k = points.len();
    let mut hit = vec![false; k];
    let mut vals = vec![0.0; k];
    for &c in grid {
        for (v, &(_, f, h)) in vals.iter_mut().zip(points) {
            *v = f + c * h;
        }
        for i in 0..k {
            if hit[i] {
                continue;
            }
            let (ni, fi, _) = points[i];
            let wins = (0..k).all(|j| {
                let (nj, fj, _) = points[j];
                (nj == ni && fj == fi) || vals[i] > vals[j]
            });
            hit[i] |= wins;
        }
    }
    hit
}

/// Exact open interval of `c > 0` on which instance `i` wins, from the
/// pairwise linear inequalities. Empty when `lo >= hi`.
pub fn win_interval(points: &[(u64, f64, f64)], i: usize) -> (f64, f64) {
    let (ni, fi, hi_) = points[i];
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for (j, &(nj, fj, hj)) in points.iter().enumerate() {
        if j == i || (nj == ni && fj == fi) {
            continue;
        }
        // (fi - fj) + c (hi - hj) > 0
        let (a, b) = (fi - fj, hi_ - hj);
        if b > 0.0 {
            lo = lo.max(-a / b);
        } else if b < 0.0 {
            hi = hi.min(a / -b);
        } else if a <= 0.0 {
            return (1.0, 0.0);
        }
    }
    (lo, hi)
}

/// Recursion-based Luby term with memoization.
pub struct LubyOracle {
    memo: std::collections::HashMap<u64, u64>,
}

impl LubyOracle {
    pub fn new() -> Self {
        LubyOracle {
            memo: Default::default(),
        }
    }

    pub fn term(&mut self, i: u64) -> u64 {
        if let Some(&v) = self.memo.get(&i) {
            return v;
        }
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        let v = if i == (1u64 << k) - 1 {
            1u64 << (k - 1)
        } else {
            self.term(i - (1u64 << (k - 1)) + 1)
        };
        self.memo.insert(i, v);
        v
    }
}
