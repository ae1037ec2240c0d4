//! Upper-convex-hull instance selection.
//!
//! Each instance is mapped to the point `(h(n), f̂)`. An instance is worth a
//! step if, for some scale `c > 0`, its optimistic estimate `f̂ + c·h(n)` is
//! strictly the largest. Those instances are exactly the corners of the upper
//! convex hull of all instance points plus the anchor `(0, max f̂)`.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::InstanceState;

/// Relative tolerance of the collinearity test.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Decreasing weight `h` with `h(0) = 1` and `h(n) -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HFunction {
    /// `alpha^n`, `0 < alpha < 1`.
    Exponential { alpha: f64 },
    /// `exp(-n / sqrt(t))` where `t` is the total step count before the round.
    TimeVarying { total_steps: f64 },
}

impl HFunction {
    pub fn value(&self, n: u64) -> f64 {
        h_value(self, n)
    }
}

pub fn h_value(h: &HFunction, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    match *h {
        HFunction::Exponential { alpha } => alpha.powf(n as f64),
        HFunction::TimeVarying { total_steps } => (-(n as f64) / total_steps.sqrt()).exp(),
    }
}

/// How `h` is chosen for each round.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HSchedule {
    Fixed {
        alpha: f64,
    },
    #[default]
    TimeVarying,
}

impl HSchedule {
    /// The function used in a round that starts after `total_steps` steps.
    /// The time-varying form needs `t >= 1`; an empty pool uses `t = 1`.
    pub fn at(&self, total_steps: u64) -> HFunction {
        match *self {
            HSchedule::Fixed { alpha } => HFunction::Exponential { alpha },
            HSchedule::TimeVarying => HFunction::TimeVarying {
                total_steps: total_steps.max(1) as f64,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HSchedule::Fixed { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::Config(format!("h decay must lie in (0, 1), got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPoint {
    pub x: f64,
    pub y: f64,
    /// `None` marks the virtual anchor.
    pub id: Option<usize>,
}

impl HullPoint {
    pub fn new(x: f64, y: f64, id: usize) -> Self {
        HullPoint { x, y, id: Some(id) }
    }

    pub fn anchor(y: f64) -> Self {
        HullPoint { x: 0.0, y, id: None }
    }
}

/// Cross-product turn test for `o.x < a.x < b.x`, divided through by both
/// x-gaps. Tiny `h` values would make the plain products underflow to zero
/// and turn real corners into false collinear points; slopes stay finite or
/// go to infinity, which compares correctly.
fn strictly_right_turn(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let s1 = (a.1 - o.1) / (a.0 - o.0);
    let s2 = (b.1 - a.1) / (b.0 - a.0);
    if s1.is_infinite() || s2.is_infinite() {
        return s2 < s1;
    }
    s2 - s1 < -COLLINEAR_TOL * (s1.abs() + s2.abs())
}

/// Ids of points that are strict vertices of the upper convex hull.
///
/// Points are swept by increasing `x`. At equal `x` only the highest point
/// survives; points with identical coordinates form one vertex and all of
/// their ids are returned. The anchor's id is never returned. The result is
/// ordered by increasing `x`.
pub fn upper_hull_corners(points: &[HullPoint]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::Contract("upper_hull_corners on empty point set".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.x.total_cmp(&pb.x).then(pb.y.total_cmp(&pa.y))
    });

    // collapse equal x to the highest point(s)
    let mut verts: Vec<((f64, f64), Vec<usize>)> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let head = points[order[i]];
        let mut ids = Vec::new();
        let mut j = i;
        while j < order.len() && points[order[j]].x == head.x {
            let p = points[order[j]];
            if p.y == head.y {
                ids.extend(p.id);
            }
            j += 1;
        }
        verts.push(((head.x, head.y), ids));
        i = j;
    }

    let mut hull: Vec<usize> = Vec::with_capacity(verts.len());
    for v in 0..verts.len() {
        while hull.len() >= 2 {
            let o = verts[hull[hull.len() - 2]].0;
            let a = verts[hull[hull.len() - 1]].0;
            if strictly_right_turn(o, a, verts[v].0) {
                break;
            }
            hull.pop();
        }
        hull.push(v);
    }
    Ok(hull.into_iter().flat_map(|v| verts[v].1.iter().copied()).collect())
}

pub enum TieBreak<'a> {
    Random(&'a mut dyn RngCore),
    SmallestIndex,
}

struct Group {
    n: u64,
    best: f64,
    ids: Vec<usize>,
}

/// Groups active instances by step count, keeping those that attain the
/// maximum estimate at each count. Lower estimates at the same count can
/// never be hull vertices.
fn group_by_steps<'a>(states: impl IntoIterator<Item = &'a InstanceState>) -> Vec<Group> {
    let mut by_n: BTreeMap<u64, Group> = BTreeMap::new();
    for s in states.into_iter().filter(|s| s.is_active()) {
        let g = by_n.entry(s.n).or_insert_with(|| Group {
            n: s.n,
            best: s.best_value,
            ids: Vec::new(),
        });
        if s.best_value > g.best {
            g.best = s.best_value;
            g.ids.clear();
        }
        if s.best_value == g.best {
            g.ids.push(s.id);
        }
    }
    by_n.into_values().collect()
}

/// Instances selected by the hull rule before the one-per-step-count
/// reduction: every active instance whose state is a hull corner. Instances
/// sharing a corner state are all returned.
pub fn hull_candidates<'a>(
    states: impl IntoIterator<Item = &'a InstanceState>,
    h: &HFunction,
) -> Result<Vec<Vec<usize>>> {
    let groups = group_by_steps(states);
    if groups.is_empty() {
        return Err(Error::Exhausted);
    }
    let max = groups.iter().map(|g| g.best).fold(f64::NEG_INFINITY, f64::max);
    let mut points = Vec::with_capacity(groups.len() + 1);
    points.push(HullPoint::anchor(max));
    points.extend(
        groups
            .iter()
            .enumerate()
            .map(|(gi, g)| HullPoint::new(h.value(g.n), g.best, gi)),
    );
    let mut corners = upper_hull_corners(&points)?;
    // h can round two step counts onto the same x; keep the smaller count
    corners.sort_unstable();
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(corners.len());
    for gi in corners {
        let x = h.value(groups[gi].n);
        if out.iter().any(|&(ox, _)| ox == x) {
            continue;
        }
        out.push((x, gi));
    }
    Ok(out.into_iter().map(|(_, gi)| groups[gi].ids.clone()).collect())
}

/// The METAMAX selection rule over the active instances in `states`.
///
/// Returns ids sorted ascending. Among selected instances with equal step
/// counts exactly one is kept, chosen by `tie_break`.
pub fn select_metamax<'a>(
    states: impl IntoIterator<Item = &'a InstanceState>,
    h: &HFunction,
    tie_break: TieBreak<'_>,
) -> Result<Vec<usize>> {
    let groups = hull_candidates(states, h)?;
    let mut selected: Vec<usize> = match tie_break {
        TieBreak::SmallestIndex => groups
            .iter()
            .map(|ids| *ids.iter().min().expect("non-empty group"))
            .collect(),
        TieBreak::Random(rng) => groups
            .iter()
            .map(|ids| {
                if ids.len() == 1 {
                    ids[0]
                } else {
                    ids[rng.random_range(0..ids.len())]
                }
            })
            .collect(),
    };
    selected.sort_unstable();
    Ok(selected)
}
