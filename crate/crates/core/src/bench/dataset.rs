//! Clustering datasets: a text loader and the bundled Gaussian mixture.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::search::kmeans::Dataset;

/// Path prefix that selects a dataset compiled into the library.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub const GMM_ROWS: usize = 2000;
pub const GMM_CENTERS: usize = 10;
pub const GMM_DIM: usize = 2;
pub const GMM_SEED: u64 = 20090714;

const GMM_TEXT: &str = include_str!("../../data/gmm.csv");

fn is_separator(c: char) -> bool {
    c == ',' || c.is_whitespace()
}

/// Parses rows of comma- or whitespace-separated numbers. A first line made
/// only of non-numeric tokens is taken as a header and skipped.
pub fn parse_dataset(text: &str, origin: &str) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut cols = None;
    let mut rows = 0usize;
    let mut values = Vec::new();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let tokens: Vec<&str> = line.split(is_separator).filter(|t| !t.is_empty()).collect();
        if tokens.is_empty() {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> = tokens.iter().map(|t| t.parse::<f64>()).collect();
        if !seen_data && parsed.iter().all(|p| p.is_err()) {
            log::warn!("{origin}:{lineno}: skipping header row");
            seen_data = true;
            continue;
        }
        seen_data = true;
        let mut row = Vec::with_capacity(tokens.len());
        for (tok, p) in tokens.iter().zip(parsed) {
            match p {
                Ok(v) if v.is_finite() => row.push(v),
                _ => return Err(err(lineno, format!("not a finite number: {tok:?}"))),
            }
        }
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => return Err(err(lineno, format!("expected {c} columns, found {}", row.len()))),
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(err(0, "no data rows".into()));
    };
    Dataset::new(rows, cols, values)
}

/// Loads a dataset file, or a bundled one when `path` is `builtin:gmm`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path.to_string_lossy();
    if let Some(builtin) = name.strip_prefix(BUILTIN_PREFIX) {
        return match builtin {
            "gmm" => parse_dataset(GMM_TEXT, "builtin:gmm"),
            other => Err(Error::Config(format!("unknown builtin dataset {other:?}"))),
        };
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let data = parse_dataset(&text, &name)?;
    log::info!("{name}: {} rows, {} columns", data.rows(), data.cols());
    Ok(data)
}

/// `rows` points around `centers` random means in `[0, 10]^dim`, each with
/// isotropic standard deviation `std`.
pub fn gaussian_mixture(rows: usize, centers: usize, dim: usize, std: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    let noise = Normal::new(0.0, std).expect("positive std");
    let mut values = Vec::with_capacity(rows * dim);
    for i in 0..rows {
        let m = &means[i % centers];
        values.extend(m.iter().map(|&c| c + noise.sample(&mut rng)));
    }
    Dataset::new(rows, dim, values).expect("finite samples")
}

/// The mixture behind `builtin:gmm`.
pub fn bundled_gmm() -> Dataset {
    gaussian_mixture(GMM_ROWS, GMM_CENTERS, GMM_DIM, 0.6, GMM_SEED)
}

/// Text form used for the bundled file: one row per line, 17 significant
/// digits.
pub fn format_dataset(data: &Dataset) -> String {
    let mut out = String::new();
    for row in data.iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
