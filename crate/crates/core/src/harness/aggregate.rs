//! Error curves across runs.

use crate::instance::RunTrace;

/// z-value of a two-sided 99% normal interval.
pub const Z99: f64 = 2.576;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub evals: u64,
    /// `f* - best` when the optimum is known, the raw best value otherwise.
    pub mean: f64,
    pub std: Option<f64>,
    pub ci99_halfwidth: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub strategy: String,
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }
}

/// Mean, sample standard deviation and 99% halfwidth. The spread is absent
/// for a single sample.
pub fn summarize(values: &[f64]) -> (f64, Option<f64>, Option<f64>) {
    let n = values.len();
    assert!(n > 0, "no values to summarize");
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    (mean, Some(std), Some(Z99 * std / (n as f64).sqrt()))
}

/// Samples every trace at `grid`. Traces with nothing recorded yet at a
/// grid point are left out of that point.
pub fn aggregate(strategy: &str, traces: &[&RunTrace], grid: &[u64], known_max: Option<f64>) -> AggregateCurve {
    let mut points = Vec::with_capacity(grid.len());
    for &evals in grid {
        let values: Vec<f64> = traces
            .iter()
            .filter_map(|t| t.best_at(evals))
            .map(|b| known_max.map_or(b, |m| m - b))
            .collect();
        if values.is_empty() {
            continue;
        }
        let (mean, std, half) = summarize(&values);
        points.push(CurvePoint {
            evals,
            mean,
            std,
            ci99_halfwidth: half,
            runs: values.len(),
        });
    }
    AggregateCurve {
        strategy: strategy.to_string(),
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(points: &[(u64, f64)]) -> RunTrace {
        let mut t = RunTrace::new("s", 0);
        t.checkpoints = points.to_vec();
        t
    }

    #[test]
    fn single_run_has_no_spread() {
        assert_eq!(summarize(&[3.0]), (3.0, None, None));
    }

    #[test]
    fn equal_runs() {
        assert_eq!(summarize(&[1.0, 1.0]), (1.0, Some(0.0), Some(0.0)));
    }

    #[test]
    fn hand_example() {
        let (m, s, h) = summarize(&[0.0, 2.0]);
        assert_eq!(m, 1.0);
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((h.unwrap() - 2.576).abs() < 1e-12);
    }

    #[test]
    fn matches_naive_recomputation() {
        let traces: Vec<RunTrace> = (0..7)
            .map(|r| trace(&[(1, r as f64 * 0.1), (5, 0.5 + r as f64 * 0.05), (9, 0.9)]))
            .collect();
        let refs: Vec<&RunTrace> = traces.iter().collect();
        let c = aggregate("s", &refs, &[1, 4, 5, 100], Some(1.0));
        assert_eq!(c.points.len(), 4);
        for p in &c.points {
            let vals: Vec<f64> = traces.iter().map(|t| 1.0 - t.best_at(p.evals).unwrap()).collect();
            let mean: f64 = vals.iter().sum::<f64>() / 7.0;
            let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 6.0;
            assert!((p.mean - mean).abs() <= 1e-12 * mean.abs().max(1e-300));
            assert!((p.std.unwrap() - var.sqrt()).abs() <= 1e-12 * var.sqrt().max(1e-300));
            assert_eq!(p.runs, 7);
        }
        assert!(c.points.windows(2).all(|w| w[1].mean <= w[0].mean));
    }

    #[test]
    fn missing_prefix_is_skipped() {
        let t = trace(&[(3, 1.0)]);
        let c = aggregate("s", &[&t], &[1, 2, 3], None);
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].mean, 1.0);
    }
}
