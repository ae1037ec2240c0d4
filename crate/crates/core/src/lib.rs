//! Multi-start local search with upper-convex-hull instance allocation.
//!
//! A pool of local search instances (SPSA, k-means, or anything that
//! implements [`Searcher`]) shares one evaluation budget. The METAMAX
//! strategies decide in each round which instances deserve another step by
//! looking at the upper convex hull of `(h(n), best value)` points.

pub mod bench;
pub mod error;
pub mod harness;
pub mod hull;
pub mod instance;
pub mod objective;
pub mod search;
pub mod seed;
pub mod strategy;

pub use error::{Error, Result};
pub use hull::{h_value, select_metamax, upper_hull_corners, HFunction, HSchedule, HullPoint, TieBreak};
pub use instance::{
    Instance, InstanceState, RoundRecord, RunTrace, Sample, Searcher, SearcherFactory, Status, StepReport,
};
pub use objective::{BoxBounds, Objective, ObjectiveFn, Point};
pub use strategy::{run_strategy, run_strategy_observed, StrategyConfig, StrategyKind};
