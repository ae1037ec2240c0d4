//! Experiment configuration: JSON or flat `key = value` text.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bench::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::strategy::{StrategyConfig, StrategyKind};

fn default_runs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    pub strategies: Vec<StrategyConfig>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Evaluation budget shared by strategies that do not set their own.
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    /// Evaluation counts at which best-so-far values are sampled; 50
    /// log-spaced points from 10 to the budget when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub strategies: Option<Vec<StrategyKind>>,
    pub benchmark: Option<BenchmarkSpec>,
    pub budget: Option<u64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// JSON when the text starts with `{`, flat `key = value` lines otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            flat_to_json(text)?
        };
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Builds a config from overrides alone. Benchmark, strategies and
    /// budget must all be given.
    pub fn from_overrides(o: &Overrides) -> Result<Self> {
        let missing = |what: &str| Error::Config(format!("no config file and no --{what}"));
        let mut cfg = ExperimentConfig {
            benchmark: o.benchmark.clone().ok_or_else(|| missing("benchmark"))?,
            strategies: Vec::new(),
            runs: 1,
            budget: o.budget.ok_or_else(|| missing("budget"))?,
            seed: 0,
            checkpoints: None,
            out: None,
        };
        if o.strategies.is_none() {
            return Err(missing("strategy"));
        }
        cfg.apply(o);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(kinds) = &o.strategies {
            self.strategies = kinds.iter().map(|&k| StrategyConfig::new(k, 0)).collect();
        }
        if let Some(b) = &o.benchmark {
            self.benchmark = b.clone();
        }
        if let Some(t) = o.budget {
            self.budget = t;
            for s in &mut self.strategies {
                s.budget = 0;
            }
            // an explicit grid may no longer fit
            if let Some(c) = &mut self.checkpoints {
                c.retain(|&e| e <= t);
            }
        }
        if let Some(r) = o.runs {
            self.runs = r;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(k) = o.k {
            for s in &mut self.strategies {
                s.k = k;
            }
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    /// Strategy configs with inherited budgets filled in.
    pub fn resolved_strategies(&self) -> Vec<StrategyConfig> {
        self.strategies
            .iter()
            .map(|s| {
                let mut s = s.clone();
                if s.budget == 0 {
                    s.budget = self.budget;
                }
                s
            })
            .collect()
    }

    pub fn checkpoint_grid(&self) -> Vec<u64> {
        match &self.checkpoints {
            Some(c) => c.clone(),
            None => log_grid(10, self.budget, 50),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark.validate()?;
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies configured".into()));
        }
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.budget < 1 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        for s in self.resolved_strategies() {
            s.validate()?;
        }
        let grid = self.checkpoint_grid();
        if grid.is_empty() {
            return Err(Error::Config("checkpoint grid is empty".into()));
        }
        if grid[0] < 1 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "checkpoints must be positive and strictly increasing".into(),
            ));
        }
        if *grid.last().unwrap() > self.budget {
            return Err(Error::Config(format!(
                "checkpoint {} exceeds the budget {}",
                grid.last().unwrap(),
                self.budget
            )));
        }
        Ok(())
    }
}

/// `points` roughly log-spaced integers from `lo` to `hi`, both included,
/// duplicates removed.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let lo = lo.clamp(1, hi.max(1));
    if points < 2 || lo >= hi {
        return vec![hi.max(1)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

fn scalar(v: &str) -> Value {
    serde_json::from_str::<Value>(v)
        .ok()
        .filter(|j| !j.is_object() || v.starts_with('{'))
        .unwrap_or_else(|| Value::String(v.to_string()))
}

fn insert_path(root: &mut Map<String, Value>, path: &[&str], value: Value, key: &str) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut node = root;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = entry
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("{key}: {p} is not a table")))?;
    }
    if node.insert(last.to_string(), value).is_some() {
        return Err(Error::Config(format!("duplicate key {key}")));
    }
    Ok(())
}

/// Flat format: one `key = value` per line, `#` comments. Dotted keys nest
/// (`benchmark.d = 2`). `benchmark` alone takes the short benchmark form,
/// `strategies` a comma-separated list of kinds, and `strategy.<field>`
/// sets a field on every strategy.
fn flat_to_json(text: &str) -> Result<Value> {
    let mut root = Map::new();
    let mut shared = Map::new();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: "config".into(),
            line: i + 1,
            message: format!("expected key = value, got {line:?}"),
        })?;
        let (key, val) = (key.trim(), val.trim());
        if seen.insert(key.to_string(), i + 1).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
        }
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["benchmark"] => {
                let spec = BenchmarkSpec::parse(val)?;
                root.insert("benchmark".into(), serde_json::to_value(spec).expect("serializable"));
            }
            ["strategies"] => {
                let kinds: Vec<Value> = val
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        StrategyKind::parse(s)
                            .map(|k| serde_json::json!({ "kind": k }))
                            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
                    })
                    .collect::<Result<_>>()?;
                root.insert("strategies".into(), Value::Array(kinds));
            }
            ["checkpoints"] => {
                let cps: Vec<Value> = val
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<u64>()
                            .map(Value::from)
                            .map_err(|_| Error::Config(format!("checkpoint {s:?} is not an integer")))
                    })
                    .collect::<Result<_>>()?;
                root.insert("checkpoints".into(), Value::Array(cps));
            }
            ["strategy", rest @ ..] if !rest.is_empty() => insert_path(&mut shared, rest, scalar(val), key)?,
            ["out"] => {
                root.insert("out".into(), Value::String(val.into()));
            }
            _ => insert_path(&mut root, &parts, scalar(val), key)?,
        }
    }
    if !shared.is_empty() {
        let strategies = root
            .get_mut("strategies")
            .and_then(Value::as_array_mut)
            .ok_or_else(|| Error::Config("strategy.* keys need a strategies list".into()))?;
        for s in strategies {
            let obj = s.as_object_mut().expect("built above");
            for (k, v) in &shared {
                obj.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(Value::Object(root))
}
