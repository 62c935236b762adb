//! Result rows and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// One aggregated cell. Columns that do not apply to an experiment are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub rank: Option<usize>,
    pub m: Option<f64>,
    pub y: Option<f64>,
    /// `spiky` or `flat` for the weight family of `sample_w`.
    pub weight_family: Option<String>,
    pub rho: Option<usize>,
    pub graph_kind: Option<String>,
    /// Pattern draw index for per-draw rows; empty on rows aggregated over draws.
    pub draw: Option<usize>,
    pub method: String,
    pub weighted_error_mean: f64,
    pub weighted_error_std: f64,
    pub unweighted_error_mean: f64,
    pub unweighted_error_std: f64,
    /// `‖X − X̂‖_F / ‖X‖_F`.
    pub relative_error_mean: Option<f64>,
    pub relative_error_std: Option<f64>,
    /// Empty when the pattern is too large for the dense certificate.
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    /// `m = Σ W_ij`.
    pub weight_mass: f64,
    /// Mean `|Ω|` over the patterns in the cell.
    pub sample_count: f64,
    pub expected_queries: Option<f64>,
    pub clamped_entries: Option<usize>,
    /// Estimates averaged into the row.
    pub cells: usize,
    /// `master_seed/experiment/cell`, the prefix of every derived seed in the row.
    pub seed_key: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvHeader {
    pub experiment: String,
    pub config_hash: String,
    pub git_revision: String,
    pub master_seed: u64,
    /// Which axis the `_std` columns run over.
    pub aggregation: String,
}

impl CsvHeader {
    fn pairs(&self) -> [(&'static str, String); 5] {
        [
            ("experiment", self.experiment.clone()),
            ("config_sha256", self.config_hash.clone()),
            ("git_revision", self.git_revision.clone()),
            ("master_seed", self.master_seed.to_string()),
            ("aggregation", self.aggregation.clone()),
        ]
    }
}

pub fn write_csv(mut out: impl Write, header: &CsvHeader, rows: &[ResultRow]) -> Result<(), HarnessError> {
    for (k, v) in header.pairs() {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)
            .map_err(|e| HarnessError::Data(e.to_string()))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::Data(format!("writing CSV: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_csv`]: `# key: value` comment lines, then
/// the table.
pub fn read_csv(mut input: impl Read) -> Result<(Vec<(String, String)>, Vec<ResultRow>), HarnessError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(c) => {
                let (k, v) = c.trim().split_once(':').unwrap_or((c.trim(), ""));
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let rows = r
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(|e| HarnessError::Data(format!("reading CSV: {e}")))?;
    Ok((meta, rows))
}

/// Column order of the table.
pub const COLUMNS: [&str; 25] = [
    "experiment",
    "rank",
    "m",
    "y",
    "weight_family",
    "rho",
    "graph_kind",
    "draw",
    "method",
    "weighted_error_mean",
    "weighted_error_std",
    "unweighted_error_mean",
    "unweighted_error_std",
    "relative_error_mean",
    "relative_error_std",
    "lambda",
    "mu",
    "lambda1",
    "lambda2",
    "weight_mass",
    "sample_count",
    "expected_queries",
    "clamped_entries",
    "cells",
    "seed_key",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            experiment: "sample_w".into(),
            rank: Some(5),
            m: Some(4400.0),
            y: Some(0.1),
            weight_family: Some("spiky".into()),
            rho: None,
            graph_kind: None,
            draw: None,
            method: "debiased".into(),
            weighted_error_mean: 0.123456789012345,
            weighted_error_std: 0.01,
            unweighted_error_mean: 0.2,
            unweighted_error_std: 0.0,
            relative_error_mean: None,
            relative_error_std: None,
            lambda: Some(31.5),
            mu: Some(14.0),
            lambda1: None,
            lambda2: None,
            weight_mass: 4400.0,
            sample_count: 4391.25,
            expected_queries: None,
            clamped_entries: None,
            cells: 64,
            seed_key: "1/sample_w/m0-y0".into(),
        }
    }

    #[test]
    fn roundtrip() {
        let header = CsvHeader {
            experiment: "sample_w".into(),
            config_hash: "ab".repeat(32),
            git_revision: "deadbeef".into(),
            master_seed: 1,
            aggregation: "std over pattern draws".into(),
        };
        let rows = vec![sample_row(), ResultRow { method: "standard".into(), ..sample_row() }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &header, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# experiment: sample_w\n# config_sha256: abab"));
        let table_header = text.lines().nth(5).unwrap();
        assert_eq!(table_header, COLUMNS.join(","));
        let (meta, back) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(meta[4], ("aggregation".to_string(), "std over pattern draws".to_string()));
    }
}
