//! How fast METAMAX adds instances: `r` against `t_r / ln t_r`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::output::RoundRow;
use crate::strategy::StrategyKind;

/// Default start of the tail over which the ratio band is reported.
pub const TAIL_FROM: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub strategy: String,
    pub run: usize,
    pub round: u64,
    pub total_steps: u64,
    /// `r ln t_r / t_r`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Per strategy: min and max ratio over rows with `t_r >= tail_from`.
    pub tail: BTreeMap<String, (f64, f64)>,
    pub tail_from: u64,
}

pub fn growth_ratio(round: u64, total_steps: u64) -> Option<f64> {
    (total_steps > 1).then(|| {
        let t = total_steps as f64;
        round as f64 * t.ln() / t
    })
}

/// Rejects rows from strategies whose pool does not grow by one instance
/// per round. Rows with `t_r = 1` are skipped.
pub fn instance_growth_report(rows: &[RoundRow], tail_from: u64) -> Result<GrowthReport> {
    let mut out = Vec::with_capacity(rows.len());
    let mut tail: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for r in rows {
        match StrategyKind::parse(&r.strategy) {
            Some(k) if k.grows_pool() => {}
            _ => {
                return Err(Error::Config(format!(
                    "growth report needs metamax or metamax_inf rounds, got {:?}",
                    r.strategy
                )))
            }
        }
        let rec = &r.record;
        let Some(ratio) = growth_ratio(rec.round, rec.total_steps) else {
            continue;
        };
        if rec.total_steps >= tail_from {
            let e = tail.entry(r.strategy.clone()).or_insert((ratio, ratio));
            e.0 = e.0.min(ratio);
            e.1 = e.1.max(ratio);
        }
        out.push(GrowthRow {
            strategy: r.strategy.clone(),
            run: r.run,
            round: rec.round,
            total_steps: rec.total_steps,
            ratio,
        });
    }
    Ok(GrowthReport {
        rows: out,
        tail,
        tail_from,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::RoundRecord;

    fn row(strategy: &str, round: u64, total: u64) -> RoundRow {
        RoundRow {
            strategy: strategy.into(),
            run: 0,
            record: RoundRecord {
                round,
                selected: Vec::new(),
                leader: 0,
                leader_steps: round,
                total_steps: total,
                best_value: 0.0,
                evals: total,
                pool_size: round as usize,
            },
        }
    }

    #[test]
    fn first_round_skipped() {
        let rep = instance_growth_report(&[row("metamax", 1, 1), row("metamax", 2, 3)], 1000).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!((rep.rows[0].ratio - 2.0 * 3f64.ln() / 3.0).abs() < 1e-15);
        assert!(rep.tail.is_empty());
    }

    #[test]
    fn tail_band() {
        let rows = vec![
            row("metamax", 200, 1000),
            row("metamax", 300, 2000),
            row("metamax_inf", 10, 50),
        ];
        let rep = instance_growth_report(&rows, 1000).unwrap();
        let (lo, hi) = rep.tail["metamax"];
        let a = 200.0 * 1000f64.ln() / 1000.0;
        let b = 300.0 * 2000f64.ln() / 2000.0;
        assert_eq!((lo, hi), (a.min(b), a.max(b)));
        assert!(!rep.tail.contains_key("metamax_inf"));
    }

    #[test]
    fn fixed_pool_rejected() {
        assert!(instance_growth_report(&[row("metamax_k", 2, 5)], 1000).is_err());
        assert!(instance_growth_report(&[row("my label", 2, 5)], 1000).is_err());
    }
}
