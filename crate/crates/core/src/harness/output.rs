//! CSV files: `curves.csv`, `traces.csv` and `rounds.csv`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::aggregate::AggregateCurve;
use crate::instance::RoundRecord;

pub const CURVES_HEADER: [&str; 6] = [
    "strategy",
    "checkpoint_evals",
    "mean_error",
    "std",
    "ci99_halfwidth",
    "runs",
];
pub const TRACES_HEADER: [&str; 4] = ["strategy", "run", "eval_count", "best_value"];
pub const ROUNDS_HEADER: [&str; 7] = [
    "strategy",
    "run",
    "round",
    "leader",
    "leader_steps",
    "total_steps",
    "best_value",
];

/// Decimal text with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Best-so-far of one run sampled at the checkpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub strategy: String,
    pub run: usize,
    pub eval_count: u64,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRow {
    pub strategy: String,
    pub run: usize,
    pub record: RoundRecord,
}

fn write_rows(path: &Path, header: &[&str], mut rows: Vec<Vec<String>>, key_cols: usize) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Evaluation(format!("{}: {other:?}", path.display())),
    };
    // strategy sorts as text, the other key columns as numbers
    rows.sort_by(|a, b| {
        a[0].cmp(&b[0]).then_with(|| {
            (1..key_cols)
                .map(|i| {
                    let (x, y) = (a[i].parse::<f64>().unwrap_or(0.0), b[i].parse::<f64>().unwrap_or(0.0));
                    x.total_cmp(&y)
                })
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the three CSV files into `dir`, creating it if needed, and
/// returns their paths.
pub fn emit_csv(
    dir: &Path,
    curves: &[AggregateCurve],
    traces: &[TraceRow],
    rounds: &[RoundRow],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let curve_rows = curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| {
                vec![
                    c.strategy.clone(),
                    p.evals.to_string(),
                    fmt_f64(p.mean),
                    fmt_opt(p.std),
                    fmt_opt(p.ci99_halfwidth),
                    p.runs.to_string(),
                ]
            })
        })
        .collect();
    let trace_rows = traces
        .iter()
        .map(|t| {
            vec![
                t.strategy.clone(),
                t.run.to_string(),
                t.eval_count.to_string(),
                fmt_f64(t.best_value),
            ]
        })
        .collect();
    let round_rows = rounds
        .iter()
        .map(|r| {
            let rec = &r.record;
            vec![
                r.strategy.clone(),
                r.run.to_string(),
                rec.round.to_string(),
                rec.leader.to_string(),
                rec.leader_steps.to_string(),
                rec.total_steps.to_string(),
                fmt_f64(rec.best_value),
            ]
        })
        .collect();
    let paths = [dir.join("curves.csv"), dir.join("traces.csv"), dir.join("rounds.csv")];
    write_rows(&paths[0], &CURVES_HEADER, curve_rows, 2)?;
    write_rows(&paths[1], &TRACES_HEADER, trace_rows, 3)?;
    write_rows(&paths[2], &ROUNDS_HEADER, round_rows, 3)?;
    Ok(paths.to_vec())
}

/// Reads a `rounds.csv` back. Fields not stored in the file (selected set,
/// evaluation count, pool size) are left empty or zero.
pub fn read_rounds_csv(path: &Path) -> Result<Vec<RoundRow>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => parse_err(0, format!("{other:?}")),
    })?;
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ROUNDS_HEADER {
        return Err(parse_err(1, format!("expected header {}", ROUNDS_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let int = |j: usize| {
            rec[j]
                .parse::<u64>()
                .map_err(|_| parse_err(line, format!("{}: not an integer: {:?}", ROUNDS_HEADER[j], &rec[j])))
        };
        let best_value = rec[6]
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("best_value: not a number: {:?}", &rec[6])))?;
        out.push(RoundRow {
            strategy: rec[0].to_string(),
            run: int(1)? as usize,
            record: RoundRecord {
                round: int(2)?,
                selected: Vec::new(),
                leader: int(3)? as usize,
                leader_steps: int(4)?,
                total_steps: int(5)?,
                best_value,
                evals: 0,
                pool_size: int(2)? as usize,
            },
        });
    }
    Ok(out)
}
