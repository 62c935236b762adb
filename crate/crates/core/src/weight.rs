//! Rank-1 weight matrices `W = w uᵀ`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::linalg::{DenseMatrix, FactoredVectorPair};

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("{side} factor entry {index} = {value} is not {requirement}")]
    Entry {
        side: &'static str,
        index: usize,
        value: f64,
        requirement: &'static str,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rank-1 matrix `W = left · rightᵀ` with nonnegative factors.
///
/// Built with [`WeightMatrix::new`] every implied entry is strictly positive,
/// which the estimators require. [`WeightMatrix::nonnegative`] also admits
/// zeros, so that a boolean rank-1 `1_Ω` can be used as its own weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    factors: FactoredVectorPair,
    strictly_positive: bool,
}

impl WeightMatrix {
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Result<Self, WeightError> {
        check(&left, "left", |x| x > 0.0, "finite and strictly positive")?;
        check(&right, "right", |x| x > 0.0, "finite and strictly positive")?;
        Ok(Self {
            factors: FactoredVectorPair::new(left, right),
            strictly_positive: true,
        })
    }

    pub fn nonnegative(left: Vec<f64>, right: Vec<f64>) -> Result<Self, WeightError> {
        check(&left, "left", |x| x >= 0.0, "finite and nonnegative")?;
        check(&right, "right", |x| x >= 0.0, "finite and nonnegative")?;
        let strictly_positive = left.iter().chain(&right).all(|&x| x > 0.0);
        Ok(Self {
            factors: FactoredVectorPair::new(left, right),
            strictly_positive,
        })
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::constant(rows, cols, 1.0).expect("1 is positive")
    }

    /// `c · 1 1ᵀ`
    pub fn constant(rows: usize, cols: usize, c: f64) -> Result<Self, WeightError> {
        Self::new(vec![c; rows], vec![1.0; cols])
    }

    pub fn shape(&self) -> (usize, usize) {
        self.factors.shape()
    }

    pub fn left(&self) -> &[f64] {
        &self.factors.left
    }

    pub fn right(&self) -> &[f64] {
        &self.factors.right
    }

    pub fn factors(&self) -> &FactoredVectorPair {
        &self.factors
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.factors.entry(i, j)
    }

    /// `m = Σ_ij W_ij = ‖W^(1/2)‖_F²`
    pub fn total(&self) -> f64 {
        self.left().iter().sum::<f64>() * self.right().iter().sum::<f64>()
    }

    pub fn max_entry(&self) -> f64 {
        let max = |v: &[f64]| v.iter().copied().fold(0.0f64, f64::max);
        max(self.left()) * max(self.right())
    }

    /// `W^(1/2)` in factored form.
    pub fn sqrt(&self) -> FactoredVectorPair {
        let root = |v: &[f64]| v.iter().map(|x| x.sqrt()).collect();
        FactoredVectorPair::new(root(self.left()), root(self.right()))
    }

    /// `W^(−1/2)` in factored form, or `None` when some entry is zero.
    pub fn inv_sqrt(&self) -> Option<FactoredVectorPair> {
        self.strictly_positive.then(|| {
            let f = |v: &[f64]| v.iter().map(|x| 1.0 / x.sqrt()).collect();
            FactoredVectorPair::new(f(self.left()), f(self.right()))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.factors.to_dense()
    }

    /// `c · W`, applied to the left factor.
    pub fn scaled(&self, c: f64) -> Result<Self, WeightError> {
        let left = self.left().iter().map(|x| c * x).collect();
        if self.strictly_positive {
            Self::new(left, self.right().to_vec())
        } else {
            Self::nonnegative(left, self.right().to_vec())
        }
    }

    /// Same convention as [`DenseMatrix::permuted`].
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        Self {
            factors: FactoredVectorPair::new(
                row_perm.iter().map(|&i| self.left()[i]).collect(),
                col_perm.iter().map(|&j| self.right()[j]).collect(),
            ),
            strictly_positive: self.strictly_positive,
        }
    }

    /// Two whitespace-separated lines: the left factor, then the right factor.
    pub fn write_text(&self, mut out: impl Write) -> std::io::Result<()> {
        for side in [self.left(), self.right()] {
            let line: Vec<String> = side.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        out.flush()
    }

    pub fn read_text(input: impl Read) -> Result<Self, WeightError> {
        let mut sides = Vec::new();
        for (idx, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>().map_err(|e| WeightError::Parse {
                        line: idx + 1,
                        message: format!("bad number {s:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            sides.push((idx + 1, values));
        }
        if sides.len() != 2 {
            return Err(WeightError::Parse {
                line: sides.last().map_or(1, |s| s.0),
                message: format!("expected two factor lines, found {}", sides.len()),
            });
        }
        let right = sides.pop().expect("two lines").1;
        let left = sides.pop().expect("two lines").1;
        Self::nonnegative(left, right)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WeightError> {
        Self::read_text(File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WeightError> {
        self.write_text(BufWriter::new(File::create(path)?))?;
        Ok(())
    }
}

fn check(
    v: &[f64],
    side: &'static str,
    ok: impl Fn(f64) -> bool,
    requirement: &'static str,
) -> Result<(), WeightError> {
    match v.iter().position(|&x| !(x.is_finite() && ok(x))) {
        Some(index) => Err(WeightError::Entry {
            side,
            index,
            value: v[index],
            requirement,
        }),
        None => Ok(()),
    }
}
