//! Benchmark objectives and the searcher factories that go with them.

pub mod dataset;
pub mod griewank;
pub mod subprocess;
pub mod synthetic;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dataset::{bundled_gmm, gaussian_mixture, load_dataset, parse_dataset};
pub use griewank::{griewank_mod, griewank_objective, griewank_shift};
pub use subprocess::SubprocessObjective;
pub use synthetic::{synthetic_objective, synthetic_step, SyntheticCurve, SyntheticFactory};

use crate::error::{Error, Result};
use crate::instance::SearcherFactory;
use crate::objective::{BoxBounds, Objective};
use crate::search::kmeans::{ClusteringObjective, Dataset, KmeansFactory, KmeansInit, SeedWeighting};
use crate::search::spsa::{SpsaFactory, SpsaParams};

fn default_clusters() -> usize {
    10
}
fn default_lower() -> f64 {
    -1.0
}
fn default_upper() -> f64 {
    1.0
}
fn default_timeout() -> f64 {
    subprocess::DEFAULT_TIMEOUT_SECS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkSpec {
    /// Modified Griewank on `[-1, 1]^d`, searched with SPSA.
    GriewankMod {
        d: usize,
        #[serde(default)]
        spsa: SpsaParams,
    },
    /// k-means cost over a dataset file (or `builtin:gmm`).
    Clustering {
        path: PathBuf,
        #[serde(default = "default_clusters")]
        n_clusters: usize,
        #[serde(default)]
        init: KmeansInit,
        #[serde(default)]
        weighting: SeedWeighting,
    },
    Synthetic {
        curves: Vec<SyntheticCurve>,
    },
    /// External program, searched with SPSA inside a cube.
    Subprocess {
        command: Vec<String>,
        dimension: usize,
        #[serde(default = "default_lower")]
        lower: f64,
        #[serde(default = "default_upper")]
        upper: f64,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
        #[serde(default)]
        known_max: Option<f64>,
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        spsa: SpsaParams,
    },
}

impl BenchmarkSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkSpec::GriewankMod { .. } => "griewank_mod",
            BenchmarkSpec::Clustering { .. } => "clustering",
            BenchmarkSpec::Synthetic { .. } => "synthetic",
            BenchmarkSpec::Subprocess { .. } => "subprocess",
        }
    }

    /// Parses either a JSON object or a short `kind[:arg...]` form:
    /// `griewank_mod:2`, `clustering:<path>[:N]`, `synthetic:1,1,0.5[@rate]`,
    /// `subprocess:<dimension>:<command...>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let spec: BenchmarkSpec = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
            spec.validate()?;
            return Ok(spec);
        }
        let bad = |why: &str| Error::Config(format!("benchmark {s:?}: {why}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match kind.replace('-', "_").as_str() {
            "griewank_mod" | "griewank" => BenchmarkSpec::GriewankMod {
                d: if rest.is_empty() {
                    2
                } else {
                    rest.parse().map_err(|_| bad("dimension must be an integer"))?
                },
                spsa: SpsaParams::default(),
            },
            "clustering" | "kmeans" => {
                // the path itself may contain ':' (builtin:gmm)
                let (path, n) = match rest.rsplit_once(':') {
                    Some((p, n)) if n.parse::<usize>().is_ok() => (p, n.parse().unwrap()),
                    _ => (rest, default_clusters()),
                };
                if path.is_empty() {
                    return Err(bad("missing dataset path"));
                }
                BenchmarkSpec::Clustering {
                    path: path.into(),
                    n_clusters: n,
                    init: KmeansInit::default(),
                    weighting: SeedWeighting::default(),
                }
            }
            "synthetic" => {
                let (limits, rate) = match rest.split_once('@') {
                    Some((l, r)) => (l, r.parse().map_err(|_| bad("rate must be a number"))?),
                    None => (rest, 1.0),
                };
                let curves = limits
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse().map(|l| SyntheticCurve::new(l, rate)))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("limits must be numbers"))?;
                BenchmarkSpec::Synthetic { curves }
            }
            "subprocess" => {
                let (d, cmd) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("expected subprocess:<d>:<command>"))?;
                BenchmarkSpec::Subprocess {
                    command: cmd.split_whitespace().map(String::from).collect(),
                    dimension: d.parse().map_err(|_| bad("dimension must be an integer"))?,
                    lower: default_lower(),
                    upper: default_upper(),
                    timeout_secs: default_timeout(),
                    known_max: None,
                    shift: 0.0,
                    spsa: SpsaParams::default(),
                }
            }
            _ => return Err(bad("unknown benchmark kind")),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BenchmarkSpec::GriewankMod { d, spsa } => {
                if *d < 1 {
                    return Err(Error::Config("griewank_mod needs d >= 1".into()));
                }
                spsa.validate()
            }
            BenchmarkSpec::Clustering { n_clusters, .. } => {
                if *n_clusters < 1 {
                    return Err(Error::Config("clustering needs at least one cluster".into()));
                }
                Ok(())
            }
            BenchmarkSpec::Synthetic { curves } => {
                if curves.is_empty() {
                    return Err(Error::Config("synthetic benchmark needs at least one curve".into()));
                }
                curves.iter().try_for_each(|c| c.validate())
            }
            BenchmarkSpec::Subprocess {
                command,
                dimension,
                lower,
                upper,
                timeout_secs,
                spsa,
                ..
            } => {
                if command.is_empty() {
                    return Err(Error::Config("subprocess command is empty".into()));
                }
                if *dimension < 1 {
                    return Err(Error::Config("subprocess needs dimension >= 1".into()));
                }
                BoxBounds::new(vec![(*lower, *upper); *dimension])?;
                if !(timeout_secs.is_finite() && *timeout_secs > 0.0) {
                    return Err(Error::Config("timeout_secs must be positive".into()));
                }
                spsa.validate()
            }
        }
    }

    /// Loads whatever the benchmark needs once, so runs can share it.
    pub fn prepare(&self) -> Result<Benchmark> {
        self.validate()?;
        let data = match self {
            BenchmarkSpec::Clustering { path, n_clusters, .. } => {
                let data = load_dataset(path)?;
                if data.rows() < *n_clusters {
                    return Err(Error::Config(format!(
                        "{} rows cannot hold {n_clusters} clusters",
                        data.rows()
                    )));
                }
                Some(Arc::new(data))
            }
            _ => None,
        };
        Ok(Benchmark {
            spec: self.clone(),
            data,
        })
    }
}

/// A validated benchmark with its data loaded.
#[derive(Debug, Clone)]
pub struct Benchmark {
    spec: BenchmarkSpec,
    data: Option<Arc<Dataset>>,
}

impl Benchmark {
    pub fn spec(&self) -> &BenchmarkSpec {
        &self.spec
    }

    pub fn dataset(&self) -> Option<&Arc<Dataset>> {
        self.data.as_ref()
    }

    /// A fresh objective with its evaluation counter at zero.
    pub fn objective(&self) -> Result<Objective> {
        Ok(match &self.spec {
            BenchmarkSpec::GriewankMod { d, .. } => griewank_objective(*d),
            BenchmarkSpec::Clustering { n_clusters, .. } => {
                let data = self.data.clone().expect("prepared");
                ClusteringObjective::new(data).into_objective(*n_clusters)
            }
            BenchmarkSpec::Synthetic { curves } => synthetic_objective(curves),
            BenchmarkSpec::Subprocess {
                command,
                dimension,
                lower,
                upper,
                timeout_secs,
                known_max,
                shift,
                ..
            } => {
                let f = SubprocessObjective::new(command, *timeout_secs)?;
                let mut obj = Objective::new(f, BoxBounds::cube(*dimension, *lower, *upper)).with_shift(*shift);
                if let Some(m) = known_max {
                    obj = obj.with_known_max(*m);
                }
                obj
            }
        })
    }

    /// Searcher factory for one run; instance seeds derive from `seed`.
    pub fn factory(&self, seed: u64) -> Box<dyn SearcherFactory + Send> {
        match &self.spec {
            BenchmarkSpec::GriewankMod { d, spsa } => Box::new(SpsaFactory {
                params: *spsa,
                bounds: BoxBounds::cube(*d, -1.0, 1.0),
                seed,
            }),
            BenchmarkSpec::Clustering {
                n_clusters,
                init,
                weighting,
                ..
            } => Box::new(KmeansFactory {
                data: self.data.clone().expect("prepared"),
                n_clusters: *n_clusters,
                init: *init,
                weighting: *weighting,
                seed,
            }),
            BenchmarkSpec::Synthetic { curves } => Box::new(SyntheticFactory { curves: curves.clone() }),
            BenchmarkSpec::Subprocess {
                dimension,
                lower,
                upper,
                spsa,
                ..
            } => Box::new(SpsaFactory {
                params: *spsa,
                bounds: BoxBounds::cube(*dimension, *lower, *upper),
                seed,
            }),
        }
    }
}
