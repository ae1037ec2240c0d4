//! Concrete local searchers.

pub mod kmeans;
pub mod spsa;

pub use kmeans::{Dataset, Kmeans, KmeansFactory, KmeansInit, KmeansState, SeedWeighting};
pub use spsa::{Spsa, SpsaFactory, SpsaParams};
