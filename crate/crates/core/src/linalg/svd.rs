//! Singular value decompositions.
//!
//! `full_svd` is the Golub–Reinsch algorithm: Householder reduction to upper
//! bidiagonal form followed by implicit-shift QR sweeps on the bidiagonal.
//! `truncated_svd` reuses the same bidiagonal QR kernel, but for larger
//! inputs it builds the bidiagonal with Golub–Kahan–Lanczos steps so only a
//! few dozen basis vectors are ever formed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dense::{axpy, dot, norm2, DenseMatrix};
use super::LinalgError;

/// Inputs whose short side is at most this size go straight to the dense path.
const DENSE_CUTOFF: usize = 64;
/// Lanczos Ritz triples are accepted once `‖Aᵀu − σv‖ ≤ LANCZOS_TOL · σ₁`.
const LANCZOS_TOL: f64 = 1e-11;
/// QR sweeps allowed per singular value before giving up.
const MAX_SWEEPS_PER_VALUE: usize = 100;
/// Fixed seed for Lanczos start and restart vectors, so results depend only on the input.
const LANCZOS_SEED: u64 = 0x5eed_1a2c_705f_0001;

/// Leading singular triples `U · diag(σ) · Vᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdTriple {
    /// `d₁ × r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `d₂ × r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdTriple {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U · diag(σ) · Vᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n, r) = (self.u.rows(), self.v.rows(), self.rank());
        let mut out = DenseMatrix::zeros(m, n);
        for i in 0..m {
            let urow = self.u.row(i);
            let orow = &mut out.data[i * n..(i + 1) * n];
            for l in 0..r {
                let c = urow[l] * self.singular_values[l];
                if c == 0.0 {
                    continue;
                }
                for (j, o) in orow.iter_mut().enumerate() {
                    *o += c * self.v.data[j * r + l];
                }
            }
        }
        out
    }

    /// Keeps the leading `r` triples.
    pub fn truncate(self, r: usize) -> SvdTriple {
        if r >= self.rank() {
            return self;
        }
        let keep = |m: &DenseMatrix| DenseMatrix::from_fn(m.rows(), r, |i, j| m.get(i, j));
        SvdTriple {
            u: keep(&self.u),
            v: keep(&self.v),
            singular_values: self.singular_values[..r].to_vec(),
        }
    }

    fn transposed(self) -> SvdTriple {
        SvdTriple {
            u: self.v,
            singular_values: self.singular_values,
            v: self.u,
        }
    }
}

/// Top-`r` singular triple of `a`.
///
/// The reconstruction is a best rank-`r` approximation in both the Frobenius
/// and the operator norm. Output is a deterministic function of `a`.
pub fn truncated_svd(a: &DenseMatrix, r: usize) -> Result<SvdTriple, LinalgError> {
    let short = a.rows().min(a.cols());
    if r == 0 || r > short {
        return Err(LinalgError::RankOutOfRange {
            rank: r,
            max: short,
        });
    }
    if short <= DENSE_CUTOFF || 3 * r >= short {
        return Ok(full_svd(a)?.truncate(r));
    }
    lanczos_svd(a, r, LANCZOS_TOL)
}

/// Largest singular value of `a`, accurate to relative tolerance `tol`.
pub fn operator_norm(a: &DenseMatrix, tol: f64) -> Result<f64, LinalgError> {
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument(format!(
            "operator norm tolerance must be positive, got {tol}"
        )));
    }
    let short = a.rows().min(a.cols());
    if short == 0 {
        return Ok(0.0);
    }
    if short <= DENSE_CUTOFF {
        return Ok(full_svd(a)?.singular_values[0]);
    }
    Ok(lanczos_svd(a, 1, tol.min(1e-6))?.singular_values[0])
}

/// Thin SVD with `min(d₁, d₂)` triples.
pub fn full_svd(a: &DenseMatrix) -> Result<SvdTriple, LinalgError> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(SvdTriple {
            u: DenseMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    if m >= n {
        let mut cm = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                cm[j * m + i] = a.get(i, j);
            }
        }
        let (u, s, v) = golub_reinsch(cm, m, n)?;
        Ok(assemble(u, s, v, m, n))
    } else {
        // row-major storage of `a` is column-major storage of `aᵀ`
        let (u, s, v) = golub_reinsch(a.data.clone(), n, m)?;
        Ok(assemble(u, s, v, n, m).transposed())
    }
}

fn assemble(ucols: Vec<f64>, s: Vec<f64>, vcols: Vec<f64>, m: usize, n: usize) -> SvdTriple {
    let k = s.len();
    SvdTriple {
        u: DenseMatrix::from_fn(m, k, |i, j| ucols[j * m + i]),
        singular_values: s,
        v: DenseMatrix::from_fn(n, k, |i, j| vcols[j * n + i]),
    }
}

/// Golub–Reinsch SVD of an `m × n` column-major matrix with `m ≥ n`.
///
/// Returns `(U, σ, V)` with `U` as `n` columns of length `m` and `V` as `n`
/// columns of length `n`, both column-major.
fn golub_reinsch(
    mut a: Vec<f64>,
    m: usize,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), LinalgError> {
    debug_assert!(m >= n && n > 0);
    let mut s = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut work = vec![0.0; m];
    let mut u = vec![0.0; n * m];
    let mut v = vec![0.0; n * n];

    let nct = (m - 1).min(n);
    let nrt = n.saturating_sub(2).min(m);

    // Householder reduction to bidiagonal form.
    for k in 0..nct.max(nrt) {
        if k < nct {
            let col = &mut a[k * m..(k + 1) * m];
            let mut sk = 0.0f64;
            for &x in &col[k..] {
                sk = sk.hypot(x);
            }
            if sk != 0.0 {
                if col[k] < 0.0 {
                    sk = -sk;
                }
                for x in &mut col[k..] {
                    *x /= sk;
                }
                col[k] += 1.0;
            }
            s[k] = -sk;
        }
        for j in (k + 1)..n {
            if k < nct && s[k] != 0.0 {
                let (left, right) = a.split_at_mut(j * m);
                let colk = &left[k * m..(k + 1) * m];
                let colj = &mut right[..m];
                let t = -dot(&colk[k..], &colj[k..]) / colk[k];
                axpy(t, &colk[k..], &mut colj[k..]);
            }
            e[j] = a[j * m + k];
        }
        if k < nct {
            u[k * m + k..(k + 1) * m].copy_from_slice(&a[k * m + k..(k + 1) * m]);
        }
        if k < nrt {
            let mut ek = 0.0f64;
            for &x in &e[k + 1..] {
                ek = ek.hypot(x);
            }
            if ek != 0.0 {
                if e[k + 1] < 0.0 {
                    ek = -ek;
                }
                for x in &mut e[k + 1..] {
                    *x /= ek;
                }
                e[k + 1] += 1.0;
            }
            e[k] = -ek;
            if k + 1 < m && e[k] != 0.0 {
                work[k + 1..].iter_mut().for_each(|w| *w = 0.0);
                for j in (k + 1)..n {
                    axpy(e[j], &a[j * m + k + 1..(j + 1) * m], &mut work[k + 1..]);
                }
                for j in (k + 1)..n {
                    let t = -e[j] / e[k + 1];
                    axpy(t, &work[k + 1..], &mut a[j * m + k + 1..(j + 1) * m]);
                }
            }
            v[k * n + k + 1..(k + 1) * n].copy_from_slice(&e[k + 1..]);
        }
    }

    // Final bidiagonal of order n.
    let p = n;
    if nct < n {
        s[nct] = a[nct * m + nct];
    }
    if nrt + 1 < p {
        e[nrt] = a[(p - 1) * m + nrt];
    }
    e[p - 1] = 0.0;

    // Accumulate U.
    for j in nct..n {
        u[j * m..(j + 1) * m].iter_mut().for_each(|x| *x = 0.0);
        u[j * m + j] = 1.0;
    }
    for k in (0..nct).rev() {
        if s[k] != 0.0 {
            for j in (k + 1)..n {
                let (left, right) = u.split_at_mut(j * m);
                let colk = &left[k * m..(k + 1) * m];
                let colj = &mut right[..m];
                let t = -dot(&colk[k..], &colj[k..]) / colk[k];
                axpy(t, &colk[k..], &mut colj[k..]);
            }
            let colk = &mut u[k * m..(k + 1) * m];
            for x in &mut colk[k..] {
                *x = -*x;
            }
            colk[k] += 1.0;
            colk[..k].iter_mut().for_each(|x| *x = 0.0);
        } else {
            u[k * m..(k + 1) * m].iter_mut().for_each(|x| *x = 0.0);
            u[k * m + k] = 1.0;
        }
    }

    // Accumulate V.
    for k in (0..n).rev() {
        if k < nrt && e[k] != 0.0 {
            for j in (k + 1)..n {
                let (left, right) = v.split_at_mut(j * n);
                let colk = &left[k * n..(k + 1) * n];
                let colj = &mut right[..n];
                let t = -dot(&colk[k + 1..], &colj[k + 1..]) / colk[k + 1];
                axpy(t, &colk[k + 1..], &mut colj[k + 1..]);
            }
        }
        v[k * n..(k + 1) * n].iter_mut().for_each(|x| *x = 0.0);
        v[k * n + k] = 1.0;
    }

    bidiagonal_qr(&mut s, &mut e, &mut u, m, &mut v, n)?;
    Ok((u, s, v))
}

/// Rotates columns `j1` and `j2` (column-major, length `len`):
/// `x ← c·x + s·y`, `y ← −s·x + c·y`.
#[inline]
fn rotate_columns(cols: &mut [f64], len: usize, j1: usize, j2: usize, c: f64, s: f64) {
    debug_assert_ne!(j1, j2);
    let (x, y) = if j1 < j2 {
        let (lo, hi) = cols.split_at_mut(j2 * len);
        (&mut lo[j1 * len..(j1 + 1) * len], &mut hi[..len])
    } else {
        let (lo, hi) = cols.split_at_mut(j1 * len);
        let y = &mut lo[j2 * len..(j2 + 1) * len];
        (&mut hi[..len], y)
    };
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let t = c * *xi + s * *yi;
        *yi = -s * *xi + c * *yi;
        *xi = t;
    }
}

#[inline]
fn swap_columns(cols: &mut [f64], len: usize, j: usize) {
    let (lo, hi) = cols.split_at_mut((j + 1) * len);
    lo[j * len..].swap_with_slice(&mut hi[..len]);
}

/// Implicit-shift QR iteration on the upper bidiagonal `(s, e)`.
///
/// `e[p-1]` must be zero on entry. Rotations are accumulated into the
/// column-major `u` (columns of length `m`) and `v` (columns of length `n`).
/// On exit `s` holds the singular values in nonincreasing order.
pub(crate) fn bidiagonal_qr(
    s: &mut [f64],
    e: &mut [f64],
    u: &mut [f64],
    m: usize,
    v: &mut [f64],
    n: usize,
) -> Result<(), LinalgError> {
    let mut p = s.len();
    if p == 0 {
        return Ok(());
    }
    let pp = p - 1;
    let eps = f64::EPSILON;
    let tiny = 2.0f64.powi(-966);
    let mut iter = 0usize;

    while p > 0 {
        // Find the largest k with a negligible e[k].
        let mut k: isize = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks: isize = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = e[ksu].abs() * f64::from(u8::from(ksu != p))
                    + if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 };
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            // Deflate a negligible s[p-1].
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    rotate_columns(v, n, j, p - 1, cs, sn);
                }
            }
            // Split at a negligible s[k-1].
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    rotate_columns(u, m, j, k - 1, cs, sn);
                }
            }
            // One QR sweep with a Wilkinson-style shift.
            3 => {
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;

                for j in k..p - 1 {
                    let mut t = f.hypot(g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    rotate_columns(v, n, j, j + 1, cs, sn);

                    t = f.hypot(g);
                    cs = f / t;
                    sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    if j < m - 1 {
                        rotate_columns(u, m, j, j + 1, cs, sn);
                    }
                }
                e[p - 2] = f;
                iter += 1;
                if iter > MAX_SWEEPS_PER_VALUE {
                    return Err(LinalgError::NoConvergence {
                        routine: "bidiagonal QR",
                        iterations: iter,
                    });
                }
            }
            // Convergence of s[k]: make it nonnegative and sort it into place.
            _ => {
                let mut k = k;
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    for x in &mut v[k * n..k * n + pp + 1] {
                        *x = -*x;
                    }
                }
                while k < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    if k < n - 1 {
                        swap_columns(v, n, k);
                    }
                    if k < m - 1 {
                        swap_columns(u, m, k);
                    }
                    k += 1;
                }
                iter = 0;
                p -= 1;
            }
        }
    }
    Ok(())
}

/// Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization.
///
/// After `k` steps, `A V_k = U_k B_k` with `B_k` upper bidiagonal and
/// `Aᵀ U_k = V_k B_kᵀ + β_k v_{k+1} e_kᵀ`. A Ritz triple `(σ, U_k p, V_k q)`
/// from the SVD of `B_k` has residual `β_k |p_k|`, which drives the stopping
/// rule. The basis grows by doubling until the leading `r` triples pass, and
/// the factorization is exact once the basis spans the short side.
fn lanczos_svd(a: &DenseMatrix, r: usize, tol: f64) -> Result<SvdTriple, LinalgError> {
    if a.rows() < a.cols() {
        return Ok(lanczos_svd(&a.transpose(), r, tol)?.transposed());
    }
    let (m, n) = a.shape();
    let anorm = a.frobenius_norm();
    if anorm == 0.0 {
        return Ok(SvdTriple {
            u: DenseMatrix::from_fn(m, r, |i, j| f64::from(u8::from(i == j))),
            singular_values: vec![0.0; r],
            v: DenseMatrix::from_fn(n, r, |i, j| f64::from(u8::from(i == j))),
        });
    }
    let breakdown = anorm * 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);

    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let v1 = random_orthonormal(n, &vs, &mut rng);
    let (alpha, u1) = left_step(a, &v1, None, &us, breakdown, &mut rng);
    vs.push(v1);
    us.push(u1);
    alphas.push(alpha);

    let mut target = n.min(2 * r + 24);
    let mut pending: Option<RightStep> = None;
    loop {
        while vs.len() < target {
            let step = match pending.take() {
                Some(step) => step,
                None => right_step(a, &us, &alphas, &vs, breakdown, &mut rng),
            };
            let (alpha, u_next) = left_step(
                a,
                &step.v,
                Some((step.beta, us.last().expect("nonempty basis"))),
                &us,
                breakdown,
                &mut rng,
            );
            betas.push(step.beta);
            vs.push(step.v);
            us.push(u_next);
            alphas.push(alpha);
        }

        let k = vs.len();
        let (residual_beta, restarted) = if k < n {
            let step = right_step(a, &us, &alphas, &vs, breakdown, &mut rng);
            let out = (step.beta, step.restarted);
            pending = Some(step);
            out
        } else {
            (0.0, false)
        };

        let mut s = alphas.clone();
        let mut e = betas.clone();
        e.push(0.0);
        let mut pb = identity_cols(k);
        let mut qb = identity_cols(k);
        bidiagonal_qr(&mut s, &mut e, &mut pb, k, &mut qb, k)?;

        let sigma1 = s[0].max(f64::MIN_POSITIVE);
        let converged = !restarted
            && (0..r).all(|i| residual_beta * pb[i * k + k - 1].abs() <= tol * sigma1);
        if converged || k == n {
            let mut u = DenseMatrix::zeros(m, r);
            let mut v = DenseMatrix::zeros(n, r);
            for l in 0..r {
                let mut ucol = vec![0.0; m];
                let mut vcol = vec![0.0; n];
                for j in 0..k {
                    axpy(pb[l * k + j], &us[j], &mut ucol);
                    axpy(qb[l * k + j], &vs[j], &mut vcol);
                }
                for (i, x) in ucol.into_iter().enumerate() {
                    u.data[i * r + l] = x;
                }
                for (i, x) in vcol.into_iter().enumerate() {
                    v.data[i * r + l] = x;
                }
            }
            s.truncate(r);
            return Ok(SvdTriple {
                u,
                singular_values: s,
                v,
            });
        }
        target = n.min(2 * target);
    }
}

struct RightStep {
    beta: f64,
    v: Vec<f64>,
    restarted: bool,
}

/// `β v_{k+1} = Aᵀ u_k − α_k v_k`, restarting with a fresh direction on breakdown.
fn right_step(
    a: &DenseMatrix,
    us: &[Vec<f64>],
    alphas: &[f64],
    vs: &[Vec<f64>],
    breakdown: f64,
    rng: &mut ChaCha8Rng,
) -> RightStep {
    let uk = us.last().expect("nonempty basis");
    let mut w = a.t_matvec(uk);
    axpy(-alphas[alphas.len() - 1], vs.last().expect("nonempty basis"), &mut w);
    reorthogonalize(&mut w, vs);
    let beta = norm2(&w);
    if beta <= breakdown {
        RightStep {
            beta: 0.0,
            v: random_orthonormal(a.cols(), vs, rng),
            restarted: true,
        }
    } else {
        w.iter_mut().for_each(|x| *x /= beta);
        RightStep {
            beta,
            v: w,
            restarted: false,
        }
    }
}

/// `α u_{k+1} = A v_{k+1} − β_k u_k`.
fn left_step(
    a: &DenseMatrix,
    v: &[f64],
    previous: Option<(f64, &Vec<f64>)>,
    us: &[Vec<f64>],
    breakdown: f64,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let mut z = a.matvec(v);
    if let Some((beta, uk)) = previous {
        axpy(-beta, uk, &mut z);
    }
    reorthogonalize(&mut z, us);
    let alpha = norm2(&z);
    if alpha <= breakdown {
        (0.0, random_orthonormal(a.rows(), us, rng))
    } else {
        z.iter_mut().for_each(|x| *x /= alpha);
        (alpha, z)
    }
}

/// Two passes of classical Gram–Schmidt against `basis`.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            axpy(-c, b, w);
        }
    }
}

fn random_orthonormal(len: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        reorthogonalize(&mut w, basis);
        let nrm = norm2(&w);
        if nrm > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nrm);
            return w;
        }
    }
}

fn identity_cols(k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        out[i * k + i] = 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn max_orthonormality_defect(q: &DenseMatrix) -> f64 {
        let g = q.transpose().matmul(q).unwrap();
        let mut worst = 0.0f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn rank_one_input_is_reproduced() {
        let mut a = DenseMatrix::zeros(3, 3);
        a.set(0, 0, 5.0);
        let t = truncated_svd(&a, 1).unwrap();
        assert!((t.singular_values[0] - 5.0).abs() < 1e-14);
        let rec = t.reconstruct();
        assert!(rec.sub(&a).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let a = DenseMatrix::diagonal(&[3.0, 2.0, 1.0]);
        let t = truncated_svd(&a, 2).unwrap();
        assert!((t.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((t.singular_values[1] - 2.0).abs() < 1e-14);
        let expect = DenseMatrix::diagonal(&[3.0, 2.0, 0.0]);
        assert!(t.reconstruct().sub(&expect).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn rank_out_of_range() {
        let a = DenseMatrix::zeros(3, 2);
        assert!(matches!(
            truncated_svd(&a, 3),
            Err(LinalgError::RankOutOfRange { rank: 3, max: 2 })
        ));
        assert!(truncated_svd(&a, 0).is_err());
    }

    #[test]
    fn full_svd_reconstructs_wide_and_tall() {
        for &(m, n) in &[(7, 4), (4, 7), (1, 5), (5, 1), (6, 6)] {
            let a = random_matrix(m, n, (m * 31 + n) as u64);
            let t = full_svd(&a).unwrap();
            assert!(t.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-12);
            assert!(max_orthonormality_defect(&t.u) < 1e-12);
            assert!(max_orthonormality_defect(&t.v) < 1e-12);
            assert!(t.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn lanczos_agrees_with_dense_path() {
        for &(m, n, r) in &[(150, 90, 4), (90, 150, 3), (120, 120, 10)] {
            let a = random_matrix(m, n, (m + 7 * n) as u64);
            let dense = full_svd(&a).unwrap();
            let lz = lanczos_svd(&a, r, LANCZOS_TOL).unwrap();
            for i in 0..r {
                let rel = (lz.singular_values[i] - dense.singular_values[i]).abs()
                    / dense.singular_values[0];
                assert!(rel < 1e-10, "σ_{i}: {rel}");
            }
            assert!(max_orthonormality_defect(&lz.u) < 1e-10);
            assert!(max_orthonormality_defect(&lz.v) < 1e-10);
            let diff = lz
                .reconstruct()
                .sub(&dense.clone().truncate(r).reconstruct())
                .unwrap()
                .frobenius_norm();
            assert!(diff < 1e-8 * dense.singular_values[0], "{diff}");
        }
    }

    #[test]
    fn lanczos_handles_exact_low_rank() {
        // rank-2 input forces breakdown and restarts
        let x = random_matrix(100, 2, 3);
        let y = random_matrix(2, 80, 4);
        let a = x.matmul(&y).unwrap();
        let t = truncated_svd(&a, 2).unwrap();
        assert!(t.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
        let t5 = lanczos_svd(&a, 5, LANCZOS_TOL).unwrap();
        assert!(t5.singular_values[2] < 1e-10);
        assert!(max_orthonormality_defect(&t5.u) < 1e-8);
    }

    #[test]
    fn zero_matrix() {
        let a = DenseMatrix::zeros(80, 70);
        let t = truncated_svd(&a, 2).unwrap();
        assert_eq!(t.singular_values, vec![0.0, 0.0]);
        assert_eq!(operator_norm(&a, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_trivial_cases() {
        assert!((operator_norm(&DenseMatrix::identity(3), 1e-10).unwrap() - 1.0).abs() < 1e-12);
        for d in [4, 100] {
            let ones = DenseMatrix::constant(d, d, 1.0);
            let nrm = operator_norm(&ones, 1e-10).unwrap();
            assert!((nrm - d as f64).abs() < 1e-9 * d as f64);
        }
        assert!(operator_norm(&DenseMatrix::identity(2), 0.0).is_err());
    }
}
