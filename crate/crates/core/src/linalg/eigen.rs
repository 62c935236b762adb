//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! the implicit QL algorithm (the EISPACK tred2/tql2 pair).


use super::dense::DenseMatrix;
use super::{LinalgError, SYMMETRY_TOL};

const MAX_QL_ITERATIONS: usize = 60;
/// Magnitudes this close, relative to the largest, count as tied.
const TIE_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `n × n`, column `j` pairs with `values[j]`.
    pub vectors: DenseMatrix,
}

/// The two eigenpairs of largest magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct TopEigenpairs {
    pub lambda1: f64,
    pub v1: Vec<f64>,
    pub lambda2: f64,
    pub v2: Vec<f64>,
}

fn check_symmetric(a: &DenseMatrix) -> Result<(), LinalgError> {
    let (n, c) = a.shape();
    if n != c {
        return Err(LinalgError::DimensionMismatch {
            op: "symmetric eigendecomposition",
            left: (n, c),
            right: (c, n),
        });
    }
    let asym = a.asymmetry().unwrap_or(0.0);
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(LinalgError::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen, LinalgError> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    // symmetrize exactly so tiny asymmetries do not leak into the reduction
    let mut v: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (a.get(i, j) + a.get(j, i))
        })
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, n);
    // tql2 rotates columns; store them contiguously
    let mut vt = transpose_square(&v, n);
    tql2(&mut vt, &mut d, &mut e, n)?;
    let vectors = DenseMatrix::from_fn(n, n, |i, j| vt[j * n + i]);
    Ok(SymmetricEigen { values: d, vectors })
}

/// Top two eigenpairs by magnitude.
///
/// Magnitudes tied to `TIE_TOL` go to the positive eigenvalue. `v1` is sign-normalized
/// so its entries sum to a nonnegative number.
pub fn top_two_eigenpairs(a: &DenseMatrix) -> Result<TopEigenpairs, LinalgError> {
    check_symmetric(a)?;
    if a.rows() < 2 {
        return Err(LinalgError::InvalidArgument(format!(
            "need at least a 2x2 matrix for two eigenpairs, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let eig = symmetric_eigen(a)?;
    let scale = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tie = TIE_TOL * scale;
    // largest magnitude; near-equal magnitudes go to the larger value
    let pick = |skip: Option<usize>| -> usize {
        let live = || (0..eig.values.len()).filter(|&k| Some(k) != skip);
        let top = live().map(|k| eig.values[k].abs()).fold(0.0f64, f64::max);
        live()
            .filter(|&k| eig.values[k].abs() >= top - tie)
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if eig.values[b] >= eig.values[k] => Some(b),
                _ => Some(k),
            })
            .expect("at least two eigenvalues")
    };
    let i1 = pick(None);
    let i2 = pick(Some(i1));
    let mut v1 = eig.vectors.column(i1);
    if v1.iter().sum::<f64>() < 0.0 {
        v1.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(TopEigenpairs {
        lambda1: eig.values[i1],
        v1,
        lambda2: eig.values[i2],
        v2: eig.vectors.column(i2),
    })
}

fn transpose_square(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = v[i * n + j];
        }
    }
    out
}

/// Householder reduction to tridiagonal form. `v` is row-major on entry
/// (the symmetric input) and on exit holds the accumulated transformation.
fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`. `vt` stores eigenvector columns
/// contiguously (`vt[j*n + k]` is component `k` of vector `j`). Sorts ascending.
fn tql2(vt: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<(), LinalgError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(LinalgError::NoConvergence {
                        routine: "tridiagonal QL",
                        iterations: iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[l + 2..n] {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            let (lo, hi) = vt.split_at_mut(k * n);
            lo[i * n..(i + 1) * n].swap_with_slice(&mut hi[..n]);
        }
    }
    Ok(())
}
