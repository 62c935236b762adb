//! Sampling patterns: sparse sets of observed index pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::linalg::DenseMatrix;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("index ({i}, {j}) out of range for a {rows}x{cols} pattern")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate member ({i}, {j})")]
    Duplicate { i: usize, j: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gave up after {attempts} attempts: {what}")]
    RetriesExhausted { attempts: usize, what: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A set `Ω ⊆ [d₁] × [d₂]`, stored as sorted column lists per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePattern {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_counts: Vec<usize>,
}

impl SamplePattern {
    /// Builds a pattern from index pairs in any order. Duplicates are an error.
    pub fn from_pairs(
        rows: usize,
        cols: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PatternError> {
        let (pattern, dups) = Self::build(rows, cols, pairs)?;
        match dups.first() {
            Some(&(i, j)) => Err(PatternError::Duplicate { i, j }),
            None => Ok(pattern),
        }
    }

    /// Like [`from_pairs`](Self::from_pairs) but drops repeats, returning how many were dropped.
    pub fn from_pairs_dedup(
        rows: usize,
        cols: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Self, usize), PatternError> {
        let (pattern, dups) = Self::build(rows, cols, pairs)?;
        Ok((pattern, dups.len()))
    }

    fn build(
        rows: usize,
        cols: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Self, Vec<(usize, usize)>), PatternError> {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); rows];
        for (i, j) in pairs {
            if i >= rows || j >= cols {
                return Err(PatternError::IndexOutOfRange { i, j, rows, cols });
            }
            lists[i].push(j);
        }
        let mut dups = Vec::new();
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            let mut k = 1;
            while k < list.len() {
                if list[k] == list[k - 1] {
                    dups.push((i, list[k]));
                    list.remove(k);
                } else {
                    k += 1;
                }
            }
        }
        Ok((Self::from_sorted_rows(rows, cols, lists), dups))
    }

    fn from_sorted_rows(rows: usize, cols: usize, lists: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        let mut col_counts = vec![0; cols];
        for list in lists {
            for &j in &list {
                col_counts[j] += 1;
            }
            col_idx.extend(list);
            row_ptr.push(col_idx.len());
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            col_counts,
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self::from_sorted_rows(rows, cols, vec![Vec::new(); rows])
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self::from_sorted_rows(rows, cols, vec![(0..cols).collect(); rows])
    }

    /// Support of a dense matrix: every entry different from zero.
    pub fn support_of(a: &DenseMatrix) -> Self {
        let lists = (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(a.rows(), a.cols(), lists)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `|Ω|`
    pub fn len(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.col_idx.is_empty()
    }

    /// Sorted column indices observed in row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.rows && self.row(i).binary_search(&j).is_ok()
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn col_counts(&self) -> &[usize] {
        &self.col_counts
    }

    /// Members in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    /// True when the pattern is square and `(i, j) ∈ Ω ⇔ (j, i) ∈ Ω`.
    pub fn is_square_symmetric(&self) -> bool {
        self.rows == self.cols && self.iter().all(|(i, j)| self.contains(j, i))
    }

    /// The 0/1 indicator `1_Ω`.
    pub fn indicator(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j) in self.iter() {
            out.data[i * self.cols + j] = 1.0;
        }
        out
    }

    /// `a` with entries outside `Ω` set to zero.
    pub fn mask(&self, a: &DenseMatrix) -> Result<DenseMatrix, PatternError> {
        self.expect_shape(a.shape(), "mask")?;
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j) in self.iter() {
            let k = i * self.cols + j;
            out.data[k] = a.data[k];
        }
        Ok(out)
    }

    pub(crate) fn expect_shape(&self, shape: (usize, usize), what: &str) -> Result<(), PatternError> {
        if shape != self.shape() {
            return Err(PatternError::Shape(format!(
                "{what}: pattern is {:?}, matrix is {shape:?}",
                self.shape()
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); self.cols];
        for (i, j) in self.iter() {
            lists[j].push(i);
        }
        Self::from_sorted_rows(self.cols, self.rows, lists)
    }

    /// Relabels indices so that `(i, j) ∈ out ⇔ (row_perm[i], col_perm[j]) ∈ self`,
    /// matching [`DenseMatrix::permuted`].
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        assert_eq!(row_perm.len(), self.rows);
        assert_eq!(col_perm.len(), self.cols);
        let mut inv_col = vec![0; self.cols];
        for (new, &old) in col_perm.iter().enumerate() {
            inv_col[old] = new;
        }
        let lists = row_perm
            .iter()
            .map(|&old| {
                let mut list: Vec<usize> = self.row(old).iter().map(|&j| inv_col[j]).collect();
                list.sort_unstable();
                list
            })
            .collect();
        Self::from_sorted_rows(self.rows, self.cols, lists)
    }

    /// Keeps the listed rows and columns, in the order given.
    pub fn restrict(&self, keep_rows: &[usize], keep_cols: &[usize]) -> Self {
        let mut new_col = vec![usize::MAX; self.cols];
        for (new, &old) in keep_cols.iter().enumerate() {
            new_col[old] = new;
        }
        let lists = keep_rows
            .iter()
            .map(|&old| {
                let mut list: Vec<usize> = self
                    .row(old)
                    .iter()
                    .filter_map(|&j| (new_col[j] != usize::MAX).then_some(new_col[j]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        Self::from_sorted_rows(keep_rows.len(), keep_cols.len(), lists)
    }

    /// Writes the native text format: `d1 d2 nnz` then one `i j` line per member.
    pub fn write_native(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.rows, self.cols, self.len())?;
        for (i, j) in self.iter() {
            writeln!(out, "{i} {j}")?;
        }
        out.flush()
    }

    pub fn read_native(input: impl Read) -> Result<Self, PatternError> {
        let reader = BufReader::new(input);
        let mut header: Option<(usize, usize, usize)> = None;
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| PatternError::Parse {
                    line: lineno,
                    message: format!("bad integer {s:?}: {e}"),
                })
            };
            match header {
                None => {
                    if fields.len() != 3 {
                        return Err(PatternError::Parse {
                            line: lineno,
                            message: format!("expected header \"d1 d2 nnz\", got {text:?}"),
                        });
                    }
                    header = Some((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
                }
                Some((rows, cols, _)) => {
                    if fields.len() != 2 {
                        return Err(PatternError::Parse {
                            line: lineno,
                            message: format!("expected \"i j\", got {text:?}"),
                        });
                    }
                    let (i, j) = (parse(fields[0])?, parse(fields[1])?);
                    if i >= rows || j >= cols {
                        return Err(PatternError::Parse {
                            line: lineno,
                            message: format!("index ({i}, {j}) outside {rows}x{cols}"),
                        });
                    }
                    pairs.push((i, j));
                }
            }
        }
        let (rows, cols, nnz) = header.ok_or(PatternError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        if pairs.len() != nnz {
            return Err(PatternError::Parse {
                line: pairs.len() + 1,
                message: format!("header declares {nnz} members, found {}", pairs.len()),
            });
        }
        Self::from_pairs(rows, cols, pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PatternError> {
        Self::read_native(File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PatternError> {
        self.write_native(BufWriter::new(File::create(path)?))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_membership() {
        let p = SamplePattern::from_pairs(3, 4, [(0, 1), (2, 3), (0, 0), (2, 1)]).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.row(0), &[0, 1]);
        assert_eq!(p.row_counts(), vec![2, 0, 2]);
        assert_eq!(p.col_counts(), &[1, 2, 0, 1]);
        assert!(p.contains(2, 3));
        assert!(!p.contains(1, 1));
        assert!(!p.contains(7, 0));
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![(0, 0), (0, 1), (2, 1), (2, 3)]);
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(matches!(
            SamplePattern::from_pairs(2, 2, [(0, 1), (0, 1)]),
            Err(PatternError::Duplicate { i: 0, j: 1 })
        ));
        assert!(matches!(
            SamplePattern::from_pairs(2, 2, [(2, 0)]),
            Err(PatternError::IndexOutOfRange { .. })
        ));
        let (p, dups) = SamplePattern::from_pairs_dedup(2, 2, [(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!((p.len(), dups), (2, 1));
    }

    #[test]
    fn symmetry_and_transpose() {
        let p = SamplePattern::from_pairs(3, 3, [(0, 1), (1, 0), (2, 2)]).unwrap();
        assert!(p.is_square_symmetric());
        let q = SamplePattern::from_pairs(3, 3, [(0, 1)]).unwrap();
        assert!(!q.is_square_symmetric());
        assert_eq!(q.transpose().iter().collect::<Vec<_>>(), vec![(1, 0)]);
        assert!(!SamplePattern::full(2, 3).is_square_symmetric());
    }

    #[test]
    fn permuted_matches_dense() {
        let p = SamplePattern::from_pairs(3, 2, [(0, 1), (2, 0), (1, 1)]).unwrap();
        let rp = [2, 0, 1];
        let cp = [1, 0];
        assert_eq!(
            p.permuted(&rp, &cp).indicator(),
            p.indicator().permuted(&rp, &cp)
        );
    }

    #[test]
    fn native_round_trip() {
        let p = SamplePattern::from_pairs(3, 5, [(0, 4), (2, 0), (1, 1)]).unwrap();
        let mut buf = Vec::new();
        p.write_native(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "3 5 3\n0 4\n1 1\n2 0\n");
        assert_eq!(SamplePattern::read_native(&buf[..]).unwrap(), p);
    }

    #[test]
    fn native_parse_errors_carry_line() {
        let err = SamplePattern::read_native("2 2 2\n0 0\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PatternError::Parse { line: 3, .. }), "{err}");
        let err = SamplePattern::read_native("2 2 3\n0 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PatternError::Parse { .. }));
        let err = SamplePattern::read_native("2 2 1\n0 5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PatternError::Parse { line: 2, .. }));
    }

    #[test]
    fn restrict_keeps_order() {
        let p = SamplePattern::full(3, 3);
        let r = p.restrict(&[2, 0], &[1]);
        assert_eq!(r.shape(), (2, 1));
        assert_eq!(r.len(), 2);
    }
}
