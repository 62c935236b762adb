//! Observation patterns from ratings datasets.
//!
//! Only which entries were rated matters here; rating values are discarded
//! (Jester's sentinel `99` marks an unrated joke).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::linalg::RngSeed;
use crate::pattern::{PatternError, SamplePattern};

const JESTER_UNRATED: f64 = 99.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingsFormat {
    /// `user \t item \t rating \t timestamp` per line.
    #[serde(rename = "movielens100k")]
    MovieLens100k,
    /// One user per line: rating count, then one column per joke; `99` = unrated.
    JesterCsv,
}

/// A pattern over the users and items seen in a ratings file.
///
/// Rows and columns are dense re-indexings: `row_ids[i]` is the original
/// user id (MovieLens) or 0-based data-line number (Jester) of row `i`, and
/// `col_ids[j]` the item id or 0-based joke column.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestedPattern {
    pub pattern: SamplePattern,
    pub row_ids: Vec<u64>,
    pub col_ids: Vec<u64>,
    /// Repeated `(user, item)` pairs dropped while reading.
    pub duplicates: usize,
}

pub fn ingest_ratings(path: impl AsRef<Path>, format: RatingsFormat) -> Result<IngestedPattern, PatternError> {
    read_ratings(File::open(path)?, format)
}

pub fn read_ratings(input: impl Read, format: RatingsFormat) -> Result<IngestedPattern, PatternError> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    let mut jester_row = 0u64;
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        match format {
            RatingsFormat::MovieLens100k => raw.push(parse_movielens(text, lineno)?),
            RatingsFormat::JesterCsv => {
                for joke in parse_jester(text, lineno)? {
                    raw.push((jester_row, joke));
                }
                jester_row += 1;
            }
        }
    }

    let index = |ids: &mut Vec<u64>| -> BTreeMap<u64, usize> {
        ids.sort_unstable();
        ids.dedup();
        ids.iter().enumerate().map(|(k, &id)| (id, k)).collect()
    };
    let mut row_ids: Vec<u64> = raw.iter().map(|p| p.0).collect();
    let mut col_ids: Vec<u64> = raw.iter().map(|p| p.1).collect();
    let row_map = index(&mut row_ids);
    let col_map = index(&mut col_ids);
    let (pattern, duplicates) = SamplePattern::from_pairs_dedup(
        row_ids.len(),
        col_ids.len(),
        raw.iter().map(|(u, i)| (row_map[u], col_map[i])),
    )?;
    Ok(IngestedPattern {
        pattern,
        row_ids,
        col_ids,
        duplicates,
    })
}

fn parse_movielens(text: &str, line: usize) -> Result<(u64, u64), PatternError> {
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() < 3 {
        return Err(PatternError::Parse {
            line,
            message: format!("expected user, item, rating, timestamp; got {text:?}"),
        });
    }
    let id = |s: &str, what: &str| {
        s.trim().parse::<u64>().map_err(|e| PatternError::Parse {
            line,
            message: format!("bad {what} id {s:?}: {e}"),
        })
    };
    let user = id(fields[0], "user")?;
    let item = id(fields[1], "item")?;
    fields[2].trim().parse::<f64>().map_err(|e| PatternError::Parse {
        line,
        message: format!("bad rating {:?}: {e}", fields[2]),
    })?;
    Ok((user, item))
}

fn parse_jester(text: &str, line: usize) -> Result<Vec<u64>, PatternError> {
    let mut rated = Vec::new();
    for (col, field) in text.split(',').enumerate() {
        let value: f64 = field.trim().parse().map_err(|e| PatternError::Parse {
            line,
            message: format!("column {}: bad number {field:?}: {e}", col + 1),
        })?;
        if col > 0 && value != JESTER_UNRATED {
            rated.push((col - 1) as u64);
        }
    }
    if rated.is_empty() && !text.contains(',') {
        return Err(PatternError::Parse {
            line,
            message: "expected a rating count followed by joke columns".into(),
        });
    }
    Ok(rated)
}

/// Repeatedly drops rows with fewer than `min_row` members and columns with
/// fewer than `min_col`, until every survivor meets both thresholds.
///
/// Returns the filtered pattern and the kept original row and column indices.
pub fn density_filter(
    p: &SamplePattern,
    min_row: usize,
    min_col: usize,
) -> (SamplePattern, Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..p.rows()).collect();
    let mut cols: Vec<usize> = (0..p.cols()).collect();
    let mut current = p.clone();
    loop {
        let rc = current.row_counts();
        let cc = current.col_counts();
        let keep_r: Vec<usize> = (0..current.rows()).filter(|&i| rc[i] >= min_row).collect();
        let keep_c: Vec<usize> = (0..current.cols()).filter(|&j| cc[j] >= min_col).collect();
        if keep_r.len() == current.rows() && keep_c.len() == current.cols() {
            return (current, rows, cols);
        }
        current = current.restrict(&keep_r, &keep_c);
        rows = keep_r.iter().map(|&i| rows[i]).collect();
        cols = keep_c.iter().map(|&j| cols[j]).collect();
    }
}

/// Keeps `n` rows chosen uniformly without replacement (in original order),
/// then drops columns left empty. Returns the kept original indices.
pub fn subsample_rows(p: &SamplePattern, n: usize, seed: RngSeed) -> (SamplePattern, Vec<usize>, Vec<usize>) {
    let mut keep: Vec<usize> = if n >= p.rows() {
        (0..p.rows()).collect()
    } else {
        sample(&mut seed.rng(), p.rows(), n).into_vec()
    };
    keep.sort_unstable();
    let all_cols: Vec<usize> = (0..p.cols()).collect();
    let sub = p.restrict(&keep, &all_cols);
    let cc = sub.col_counts();
    let cols: Vec<usize> = (0..sub.cols()).filter(|&j| cc[j] > 0).collect();
    let rows_all: Vec<usize> = (0..sub.rows()).collect();
    (sub.restrict(&rows_all, &cols), keep, cols)
}
