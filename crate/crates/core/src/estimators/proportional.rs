//! Recovery from entries queried with probability built from the SVD of the
//! matrix itself.

use super::{debiased_maxnorm_projection, maxnorm_solve, EstimatorConfig, EstimatorError, MaxNormOptions, MaxNormSolution, ObservationMatrix};
use crate::linalg::{full_svd, DenseMatrix, RngSeed};
use crate::pattern::SamplePattern;
use crate::patterns::{sample_with, PROBABILITY_SLACK};
use crate::weight::WeightMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct ProportionalOptions {
    pub iterations: usize,
    pub step: f64,
    /// Seeds the solver's initialization; the query pattern uses the seed
    /// passed to the recovery call.
    pub solver_seed: RngSeed,
    /// Singular values below `rank_tol · σ₁` are treated as zero.
    pub rank_tol: f64,
}

impl Default for ProportionalOptions {
    fn default() -> Self {
        Self {
            iterations: 2000,
            step: 1.0,
            solver_seed: RngSeed(0),
            rank_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProportionalOutcome {
    pub x_hat: DenseMatrix,
    pub queried: SamplePattern,
    /// The weight before clamping; entries above 1 were queried with probability 1.
    pub weight: WeightMatrix,
    /// Number of weight entries above 1.
    pub clamped_entries: usize,
    /// `Σ min(W_ij, 1)`, the expected number of queries.
    pub expected_queries: f64,
    /// Numerical rank of the input.
    pub rank: usize,
    /// Max-norm radius `‖X‖_* / √m`.
    pub radius: f64,
    pub solver: MaxNormSolution,
}

struct Leverage {
    weight: WeightMatrix,
    rank: usize,
    nuclear: f64,
}

/// `W_ij = m · ‖eᵢᵀ U Σ^(1/2)‖² · ‖eⱼᵀ V Σ^(1/2)‖² / ‖X‖_*²`.
///
/// Sums to `m` over all entries. Fails with `ReductionRequired` if `x` has a
/// zero row or column.
pub fn leverage_weight(x: &DenseMatrix, m_budget: f64) -> Result<WeightMatrix, EstimatorError> {
    Ok(leverage(x, m_budget, ProportionalOptions::default().rank_tol)?.weight)
}

fn leverage(x: &DenseMatrix, m_budget: f64, rank_tol: f64) -> Result<Leverage, EstimatorError> {
    if !(m_budget > 0.0 && m_budget.is_finite()) {
        return Err(EstimatorError::InvalidConfig(format!(
            "query budget must be positive, got {m_budget}"
        )));
    }
    let (d1, d2) = x.shape();
    let empty_rows: Vec<usize> = (0..d1).filter(|&i| x.row(i).iter().all(|&v| v == 0.0)).collect();
    let empty_cols: Vec<usize> = (0..d2)
        .filter(|&j| (0..d1).all(|i| x.get(i, j) == 0.0))
        .collect();
    if d1 == 0 || d2 == 0 || !empty_rows.is_empty() || !empty_cols.is_empty() {
        return Err(EstimatorError::ReductionRequired { empty_rows, empty_cols });
    }
    let svd = full_svd(x)?;
    let s = &svd.singular_values;
    let rank = s.iter().take_while(|&&v| v > rank_tol * s[0]).count();
    let nuclear: f64 = s[..rank].iter().sum();
    let factor = |basis: &DenseMatrix, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| (0..rank).map(|l| s[l] * basis.get(i, l).powi(2)).sum())
            .collect()
    };
    let a = factor(&svd.u, d1);
    let b = factor(&svd.v, d2);
    let scale = m_budget / (nuclear * nuclear);
    let weight = WeightMatrix::new(a.iter().map(|v| v * scale).collect(), b).map_err(|e| {
        EstimatorError::InvalidConfig(format!("leverage factors are not positive: {e}"))
    })?;
    Ok(Leverage { weight, rank, nuclear })
}

/// Queries each entry independently with probability `min(W_ij, 1)` and
/// recovers `x` by max-norm constrained least squares with radius
/// `‖X‖_* / √m`.
pub fn proportional_sampling_recovery(
    x: &DenseMatrix,
    m_budget: f64,
    seed: RngSeed,
) -> Result<ProportionalOutcome, EstimatorError> {
    proportional_sampling_recovery_with(x, m_budget, seed, &ProportionalOptions::default())
}

pub fn proportional_sampling_recovery_with(
    x: &DenseMatrix,
    m_budget: f64,
    seed: RngSeed,
    opts: &ProportionalOptions,
) -> Result<ProportionalOutcome, EstimatorError> {
    let Leverage { weight, rank, nuclear } = leverage(x, m_budget, opts.rank_tol)?;
    let (d1, d2) = x.shape();
    let radius = nuclear / m_budget.sqrt();
    let clamped_entries = (0..d1)
        .flat_map(|i| (0..d2).map(move |j| (i, j)))
        .filter(|&(i, j)| weight.entry(i, j) > 1.0 + PROBABILITY_SLACK)
        .count();
    let prob = |i: usize, j: usize| weight.entry(i, j).min(1.0);
    let expected_queries: f64 = (0..d1).map(|i| (0..d2).map(|j| prob(i, j)).sum::<f64>()).sum();
    let queried = sample_with(d1, d2, prob, seed);

    let solver = if clamped_entries == 0 {
        // observe M = W^(-1/2) ∘ X on Ω; the inner solution is W^(1/2) ∘ M̂
        let inv_sqrt = weight.inv_sqrt().ok_or(EstimatorError::WeightNotPositive)?;
        let y = ObservationMatrix::observe(&inv_sqrt.hadamard_dense(x)?, None, &queried)?;
        let mut cfg = EstimatorConfig::new(rank).with_radius(radius).with_seed(opts.solver_seed);
        cfg.maxnorm_iterations = opts.iterations;
        cfg.maxnorm_step = opts.step;
        debiased_maxnorm_projection(&y, &queried, &weight, &cfg)?
            .solver
            .expect("max-norm estimate carries its solver record")
    } else {
        let target = DenseMatrix::from_fn(d1, d2, |i, j| {
            if queried.contains(i, j) {
                x.get(i, j) / prob(i, j)
            } else {
                0.0
            }
        });
        let mut mo = MaxNormOptions::new(radius, rank);
        mo.iterations = opts.iterations;
        mo.step = opts.step;
        mo.seed = opts.solver_seed;
        maxnorm_solve(&target, &mo)?
    };

    Ok(ProportionalOutcome {
        x_hat: solver.x.clone(),
        queried,
        weight,
        clamped_entries,
        expected_queries,
        rank,
        radius,
        solver,
    })
}
