//! Inputs of the plotting tool: the columns each figure kind reads from a
//! result CSV, and the CSV of two-plateau weight entries.

use std::io::Write;

use serde::{Deserialize, Serialize};
use wmc_core::patterns::{spiky_vector, WeightFamilySpec};

use crate::HarnessError;

/// Figure kinds and the result columns they need.
pub const FIGURE_COLUMNS: [(&str, &[&str]); 3] = [
    ("rank_curves", &["rank", "method", "weighted_error_mean", "weighted_error_std", "unweighted_error_mean", "unweighted_error_std"]),
    ("sample_w_curves", &["m", "y", "weight_family", "method", "weighted_error_mean", "weighted_error_std"]),
    ("spectral_gap_curves", &["rho", "graph_kind", "draw", "method", "weighted_error_mean", "weighted_error_std"]),
];

/// Columns of the weight-entries CSV read by the `weight_entries` figure.
pub const WEIGHT_COLUMNS: [&str; 5] = ["d", "m", "y", "index", "w"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub d: usize,
    pub m: f64,
    pub y: f64,
    pub index: usize,
    pub w: f64,
}

/// Entries of `w` for each `y` at fixed `d` and `m`.
pub fn weight_entries(d: usize, m: f64, ys: &[f64]) -> Result<Vec<WeightEntry>, HarnessError> {
    let mut out = Vec::with_capacity(d * ys.len());
    for &y in ys {
        let w = spiky_vector(&WeightFamilySpec::new(d, m, y))?;
        out.extend(w.into_iter().enumerate().map(|(index, w)| WeightEntry { d, m, y, index, w }));
    }
    Ok(out)
}

pub fn write_weight_entries(out: impl Write, entries: &[WeightEntry]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for e in entries {
        w.serialize(e).map_err(|e| HarnessError::Data(format!("writing CSV: {e}")))?;
    }
    w.flush()?;
    Ok(())
}
