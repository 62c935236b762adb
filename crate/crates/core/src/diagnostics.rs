//! Certification parameters of a pattern/weight pair and plug-in error bounds.
//!
//! `λ = ‖W^(1/2) − W^(−1/2) ∘ 1_Ω‖` measures how far the pattern is from its
//! weight, `μ² = max(max_i Σ_j 1_Ω/W, max_j Σ_i 1_Ω/W)` measures how lopsided it
//! is, and `m = Σ W`. For square symmetric patterns the two leading
//! eigenvalues of `1_Ω` are reported as well.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{operator_norm, top_two_eigenpairs, truncated_svd, DenseMatrix, LinalgError};
use crate::pattern::{PatternError, SamplePattern};
use crate::weight::{WeightError, WeightMatrix};

/// Largest dimension for which the dense certification matrix is built.
pub const MAX_DENSE_DIM: usize = 2048;
/// Relative accuracy requested from the operator-norm solver.
pub const LAMBDA_TOL: f64 = 1e-10;
/// Perron-vector entries down to `−PERRON_FLOOR` are treated as numerical zero.
pub const PERRON_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("shape mismatch: pattern {pattern:?}, weight {weight:?}")]
    Shape {
        pattern: (usize, usize),
        weight: (usize, usize),
    },
    #[error("{rows}x{cols} exceeds the dense limit of {MAX_DENSE_DIM}")]
    Capacity { rows: usize, cols: usize },
    #[error(
        "pattern has empty rows {empty_rows:?} and columns {empty_cols:?}; \
         drop them and solve the smaller problem"
    )]
    ReductionRequired {
        empty_rows: Vec<usize>,
        empty_cols: Vec<usize>,
    },
    #[error("{side} Perron factor entry {index} = {value:e} is negative beyond tolerance")]
    NotNonnegative {
        side: &'static str,
        index: usize,
        value: f64,
    },
    #[error("observed entry ({i}, {j}) has zero weight")]
    ZeroWeightOnPattern { i: usize, j: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Flat record of the certification parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub d1: usize,
    pub d2: usize,
    pub lambda: f64,
    pub mu: f64,
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub sample_count: usize,
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Right-hand sides of the three upper bounds, raw and divided by `√m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluginBounds {
    pub rank_bound: f64,
    pub rank_bound_normalized: f64,
    pub maxnorm_bound: f64,
    pub maxnorm_bound_normalized: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound_normalized: Option<f64>,
    pub flags: Vec<String>,
}

fn check_shapes(omega: &SamplePattern, w: &WeightMatrix) -> Result<(), DiagnosticsError> {
    if omega.shape() != w.shape() {
        return Err(DiagnosticsError::Shape {
            pattern: omega.shape(),
            weight: w.shape(),
        });
    }
    Ok(())
}

fn check_capacity(rows: usize, cols: usize) -> Result<(), DiagnosticsError> {
    if rows.max(cols) > MAX_DENSE_DIM {
        return Err(DiagnosticsError::Capacity { rows, cols });
    }
    Ok(())
}

/// `λ = ‖W^(1/2) − W^(−1/2) ∘ 1_Ω‖`.
///
/// Zero weights are allowed off `Ω` (they contribute nothing) but not on it.
pub fn compute_lambda(omega: &SamplePattern, w: &WeightMatrix) -> Result<f64, DiagnosticsError> {
    check_shapes(omega, w)?;
    let (d1, d2) = omega.shape();
    check_capacity(d1, d2)?;
    let sq = w.sqrt();
    let mut a = sq.to_dense();
    for (i, j) in omega.iter() {
        let s = sq.entry(i, j);
        if s == 0.0 {
            return Err(DiagnosticsError::ZeroWeightOnPattern { i, j });
        }
        a.set(i, j, s - 1.0 / s);
    }
    Ok(operator_norm(&a, LAMBDA_TOL)?)
}

/// `μ`, the square root of the largest weighted row or column sum of `1_Ω / W`.
pub fn compute_mu(omega: &SamplePattern, w: &WeightMatrix) -> Result<f64, DiagnosticsError> {
    check_shapes(omega, w)?;
    let mut rows = vec![0.0; omega.rows()];
    let mut cols = vec![0.0; omega.cols()];
    for (i, j) in omega.iter() {
        let wij = w.entry(i, j);
        if wij == 0.0 {
            return Err(DiagnosticsError::ZeroWeightOnPattern { i, j });
        }
        rows[i] += 1.0 / wij;
        cols[j] += 1.0 / wij;
    }
    let mu2 = rows.iter().chain(&cols).copied().fold(0.0f64, f64::max);
    Ok(mu2.sqrt())
}

/// `‖W^(1/2) ∘ (M − M̂)‖_F / ‖W^(1/2)‖_F`
pub fn weighted_error(
    w: &WeightMatrix,
    m_true: &DenseMatrix,
    m_hat: &DenseMatrix,
) -> Result<f64, DiagnosticsError> {
    Ok((weighted_sq_sum(w, m_true, m_hat)? / w.total()).sqrt())
}

/// `‖W^(1/2) ∘ (M − M̂)‖_F`, without the normalization.
pub fn weighted_error_unnormalized(
    w: &WeightMatrix,
    m_true: &DenseMatrix,
    m_hat: &DenseMatrix,
) -> Result<f64, DiagnosticsError> {
    Ok(weighted_sq_sum(w, m_true, m_hat)?.sqrt())
}

fn weighted_sq_sum(
    w: &WeightMatrix,
    m_true: &DenseMatrix,
    m_hat: &DenseMatrix,
) -> Result<f64, DiagnosticsError> {
    if m_true.shape() != w.shape() || m_hat.shape() != w.shape() {
        return Err(DiagnosticsError::Linalg(LinalgError::DimensionMismatch {
            op: "weighted error",
            left: m_true.shape(),
            right: m_hat.shape(),
        }));
    }
    let (d1, d2) = w.shape();
    let mut sum = 0.0;
    for i in 0..d1 {
        let (a, b) = (m_true.row(i), m_hat.row(i));
        let mut row = 0.0;
        for j in 0..d2 {
            let diff = a[j] - b[j];
            row += w.right()[j] * diff * diff;
        }
        sum += w.left()[i] * row;
    }
    Ok(sum)
}

/// `‖M − M̂‖_F / √(d₁d₂)`
pub fn unweighted_error(m_true: &DenseMatrix, m_hat: &DenseMatrix) -> Result<f64, DiagnosticsError> {
    let diff = m_true.sub(m_hat)?;
    let n = (diff.rows() * diff.cols()) as f64;
    Ok(diff.frobenius_norm() / n.sqrt())
}

/// Best rank-1 approximation of `1_Ω`, as a positive weight.
///
/// The top singular pair of a nonnegative matrix can be taken entrywise
/// nonnegative; the factors are `√σ₁·u₁` and `√σ₁·v₁` after flipping both
/// signs if needed. Entries within `PERRON_FLOOR` of zero are lifted to
/// `PERRON_FLOOR`.
pub fn best_rank1_weight(omega: &SamplePattern) -> Result<WeightMatrix, DiagnosticsError> {
    let empty_rows: Vec<usize> = (0..omega.rows()).filter(|&i| omega.row_count(i) == 0).collect();
    let empty_cols: Vec<usize> = (0..omega.cols()).filter(|&j| omega.col_counts()[j] == 0).collect();
    if !empty_rows.is_empty() || !empty_cols.is_empty() {
        return Err(DiagnosticsError::ReductionRequired {
            empty_rows,
            empty_cols,
        });
    }
    let svd = truncated_svd(&omega.indicator(), 1)?;
    let scale = svd.singular_values[0].sqrt();
    let mut left = svd.u.column(0);
    let mut right = svd.v.column(0);
    if left.iter().sum::<f64>() < 0.0 {
        left.iter_mut().for_each(|x| *x = -*x);
        right.iter_mut().for_each(|x| *x = -*x);
    }
    let lift = |v: &mut Vec<f64>, side: &'static str| -> Result<(), DiagnosticsError> {
        for (index, x) in v.iter_mut().enumerate() {
            *x *= scale;
            if *x < -PERRON_FLOOR {
                return Err(DiagnosticsError::NotNonnegative {
                    side,
                    index,
                    value: *x,
                });
            }
            if *x < PERRON_FLOOR {
                *x = PERRON_FLOOR;
            }
        }
        Ok(())
    };
    lift(&mut left, "left")?;
    lift(&mut right, "right")?;
    Ok(WeightMatrix::new(left, right)?)
}

/// All certification parameters for `(Ω, W)`.
pub fn diagnose(omega: &SamplePattern, w: &WeightMatrix) -> Result<DiagnosticsReport, DiagnosticsError> {
    check_shapes(omega, w)?;
    let (d1, d2) = omega.shape();
    check_capacity(d1, d2)?;
    let lambda = compute_lambda(omega, w)?;
    let mu = compute_mu(omega, w)?;
    let mut flags = Vec::new();
    let (lambda1, lambda2, gap) = if d1 >= 2 && omega.is_square_symmetric() {
        let top = top_two_eigenpairs(&omega.indicator())?;
        (
            Some(top.lambda1),
            Some(top.lambda2),
            Some(top.lambda1 - top.lambda2),
        )
    } else {
        flags.push("lambda1_lambda2_absent: pattern is not square and symmetric".to_string());
        (None, None, None)
    };
    if !w.is_strictly_positive() {
        flags.push("weight_has_zero_entries".to_string());
    }
    Ok(DiagnosticsReport {
        d1,
        d2,
        lambda,
        mu,
        m: w.total(),
        lambda1,
        lambda2,
        gap,
        sample_count: omega.len(),
        flags,
    })
}

/// Evaluates the three upper bounds at the report's parameters.
///
/// * rank-r: `2√2·r·λ·β + 4√2·σ·μ·√(r·log(d₁+d₂))`, with `β` bounding `‖M‖_∞`;
/// * max-norm: `C·√m·(β√(rλ) + √(βσ)·(μ²·r·log(d₁+d₂))^(1/4))` with `C = 1`;
/// * spectral gap, normalized: `c·(β·r·|λ₂|/λ₁ + σ·√(r·log d/λ₁))` with `c = 1`.
///
/// Normalized forms divide by `√m`; the gap bound is stated normalized and
/// its raw form multiplies by `√m`.
pub fn plugin_bounds(
    report: &DiagnosticsReport,
    r: usize,
    beta: f64,
    sigma: f64,
) -> Result<PluginBounds, DiagnosticsError> {
    if r == 0 || !(beta > 0.0) || !(sigma >= 0.0) || !beta.is_finite() || !sigma.is_finite() {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "need r >= 1, beta > 0, sigma >= 0; got r = {r}, beta = {beta}, sigma = {sigma}"
        )));
    }
    let rf = r as f64;
    let log_d = ((report.d1 + report.d2) as f64).ln();
    let sqrt_m = report.m.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;

    let rank_bound =
        2.0 * sqrt2 * rf * report.lambda * beta + 4.0 * sqrt2 * sigma * report.mu * (rf * log_d).sqrt();
    let maxnorm_bound = sqrt_m
        * (beta * (rf * report.lambda).sqrt()
            + (beta * sigma).sqrt() * (report.mu * report.mu * rf * log_d).powf(0.25));
    let mut flags = vec!["maxnorm_bound: up to constant (C = 1)".to_string()];

    let gap_normalized = match (report.lambda1, report.lambda2) {
        (Some(l1), Some(l2)) if l1 > 0.0 => {
            flags.push("gap_bound: up to constant (c = 1)".to_string());
            let d = report.d1 as f64;
            Some(beta * rf * l2.abs() / l1 + sigma * (rf * d.ln() / l1).sqrt())
        }
        _ => None,
    };
    Ok(PluginBounds {
        rank_bound,
        rank_bound_normalized: rank_bound / sqrt_m,
        maxnorm_bound,
        maxnorm_bound_normalized: maxnorm_bound / sqrt_m,
        gap_bound: gap_normalized.map(|g| g * sqrt_m),
        gap_bound_normalized: gap_normalized,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circulant(d: usize, t: usize) -> SamplePattern {
        let h = (t - 1) / 2;
        let pairs = (0..d).flat_map(|i| (0..t).map(move |k| (i, (i + d + k - h) % d)));
        SamplePattern::from_pairs(d, d, pairs).unwrap()
    }

    #[test]
    fn lambda_zero_for_exact_weight() {
        assert_eq!(
            compute_lambda(&SamplePattern::full(5, 5), &WeightMatrix::ones(5, 5)).unwrap(),
            0.0
        );
    }

    #[test]
    fn lambda_empty_pattern_is_norm_of_ones() {
        let l = compute_lambda(&SamplePattern::empty(4, 4), &WeightMatrix::ones(4, 4)).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_circulant_d6_t3() {
        let omega = circulant(6, 3);
        let w = WeightMatrix::constant(6, 6, 0.5).unwrap();
        let l = compute_lambda(&omega, &w).unwrap();
        assert!((l - 2.0 * 2f64.sqrt()).abs() < 1e-10, "{l}");
    }

    #[test]
    fn mu_examples() {
        let omega = circulant(9, 3);
        let w = WeightMatrix::constant(9, 9, 3.0 / 9.0).unwrap();
        assert!((compute_mu(&omega, &w).unwrap().powi(2) - 9.0).abs() < 1e-12);
        assert_eq!(compute_mu(&SamplePattern::empty(3, 3), &WeightMatrix::ones(3, 3)).unwrap(), 0.0);
        // boolean W equal to 1_Ω: μ² is the max row/col count
        let w = WeightMatrix::nonnegative(vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let omega = SamplePattern::support_of(&w.to_dense());
        assert!((compute_mu(&omega, &w).unwrap().powi(2) - 3.0).abs() < 1e-12);
        assert_eq!(compute_lambda(&omega, &w).unwrap(), 0.0);
    }

    #[test]
    fn zero_weight_on_pattern_rejected() {
        let w = WeightMatrix::nonnegative(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let omega = SamplePattern::full(2, 2);
        assert!(matches!(
            compute_mu(&omega, &w),
            Err(DiagnosticsError::ZeroWeightOnPattern { i: 1, j: 0 })
        ));
        assert!(compute_lambda(&omega, &w).is_err());
    }

    #[test]
    fn errors_trivial_cases() {
        let w = WeightMatrix::ones(2, 3);
        let a = DenseMatrix::from_row_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(weighted_error(&w, &a, &a).unwrap(), 0.0);
        let b = a.add(&DenseMatrix::constant(2, 3, 1.0)).unwrap();
        assert!((unweighted_error(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let mut c = a.clone();
        c.set(1, 2, 6.0 + 0.3);
        let w = WeightMatrix::new(vec![1.0, 2.0], vec![0.5, 1.0, 3.0]).unwrap();
        let expected = (6.0 / w.total()).sqrt() * 0.3;
        assert!((weighted_error(&w, &a, &c).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn best_rank1_of_full_and_circulant() {
        let w = best_rank1_weight(&SamplePattern::full(4, 6)).unwrap();
        let dense = w.to_dense();
        assert!(dense.sub(&DenseMatrix::constant(4, 6, 1.0)).unwrap().max_abs() < 1e-12);
        let w = best_rank1_weight(&circulant(15, 5)).unwrap();
        assert!(w.to_dense().sub(&DenseMatrix::constant(15, 15, 5.0 / 15.0)).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn best_rank1_requires_reduction() {
        let omega = SamplePattern::from_pairs(3, 3, [(0, 0), (2, 2)]).unwrap();
        match best_rank1_weight(&omega) {
            Err(DiagnosticsError::ReductionRequired {
                empty_rows,
                empty_cols,
            }) => {
                assert_eq!(empty_rows, vec![1]);
                assert_eq!(empty_cols, vec![1]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagnose_full_d4() {
        let rep = diagnose(&SamplePattern::full(4, 4), &WeightMatrix::ones(4, 4)).unwrap();
        assert_eq!(rep.lambda, 0.0);
        assert!((rep.mu - 2.0).abs() < 1e-15);
        assert_eq!(rep.m, 16.0);
        assert!((rep.lambda1.unwrap() - 4.0).abs() < 1e-12);
        assert!(rep.lambda2.unwrap().abs() < 1e-12);
        assert_eq!(rep.gap.unwrap(), rep.lambda1.unwrap() - rep.lambda2.unwrap());
        assert_eq!(rep.sample_count, 16);

        let b = plugin_bounds(&rep, 1, 1.0, 0.0).unwrap();
        assert_eq!(b.rank_bound, 0.0);
        let b = plugin_bounds(&rep, 1, 1.0, 1.0).unwrap();
        let expected = 4.0 * 2f64.sqrt() * 2.0 * 8f64.ln().sqrt() / 4.0;
        assert!((b.rank_bound_normalized - expected).abs() < 1e-12);
        assert!(b.gap_bound.is_some());
    }

    #[test]
    fn rectangular_report_has_no_spectrum() {
        let rep = diagnose(&SamplePattern::full(3, 4), &WeightMatrix::ones(3, 4)).unwrap();
        assert!(rep.lambda1.is_none() && rep.gap.is_none());
        assert!(!rep.flags.is_empty());
        let b = plugin_bounds(&rep, 1, 1.0, 1.0).unwrap();
        assert!(b.gap_bound.is_none());
        assert!(plugin_bounds(&rep, 0, 1.0, 1.0).is_err());
    }
}
