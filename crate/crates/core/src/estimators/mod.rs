//! Recovery procedures: debiased and standard rank-r projections, the
//! max-norm constrained debiased estimator, and proportional-sampling recovery.

mod maxnorm;
mod proportional;

pub use maxnorm::{debiased_maxnorm_projection, maxnorm_solve, IterationRecord, MaxNormOptions, MaxNormSolution};
pub use proportional::{
    leverage_weight, proportional_sampling_recovery, proportional_sampling_recovery_with, ProportionalOptions,
    ProportionalOutcome,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::DiagnosticsReport;
use crate::linalg::{truncated_svd, DenseMatrix, LinalgError, RngSeed};
use crate::pattern::{PatternError, SamplePattern};
use crate::weight::WeightMatrix;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("weight must be strictly positive for debiasing")]
    WeightNotPositive,
    #[error("sampling pattern is empty")]
    EmptyPattern,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("observation has nonzero entry ({i}, {j}) outside the pattern")]
    OffPattern { i: usize, j: usize },
    #[error(
        "max-norm solver diverged after {} iterations (objective rose {} times in a row)",
        .trace.len(), .consecutive_increases
    )]
    Divergence {
        consecutive_increases: usize,
        trace: Vec<IterationRecord>,
    },
    #[error(
        "matrix has zero-leverage rows {empty_rows:?} and columns {empty_cols:?}; \
         drop them and solve the smaller problem"
    )]
    ReductionRequired {
        empty_rows: Vec<usize>,
        empty_cols: Vec<usize>,
    },
}

/// `Y_Ω = 1_Ω ∘ (M + Z)`: observed values, zero everywhere else.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationMatrix {
    values: DenseMatrix,
}

impl ObservationMatrix {
    /// Observes `m + noise` on `omega`.
    pub fn observe(
        m: &DenseMatrix,
        noise: Option<&DenseMatrix>,
        omega: &SamplePattern,
    ) -> Result<Self, EstimatorError> {
        let y = match noise {
            Some(z) => m.add(z)?,
            None => m.clone(),
        };
        Ok(Self {
            values: omega.mask(&y)?,
        })
    }

    /// Wraps a matrix that must already vanish off `omega`.
    pub fn from_dense(values: DenseMatrix, omega: &SamplePattern) -> Result<Self, EstimatorError> {
        omega.expect_shape(values.shape(), "observation")?;
        for i in 0..values.rows() {
            for (j, &x) in values.row(i).iter().enumerate() {
                if x != 0.0 && !omega.contains(i, j) {
                    return Err(EstimatorError::OffPattern { i, j });
                }
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.scale(c),
        }
    }

    /// Same convention as [`DenseMatrix::permuted`].
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        Self {
            values: self.values.permuted(row_perm, col_perm),
        }
    }
}

/// Parameters shared by the estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub rank: usize,
    /// Entry scale `β` (bound on `‖M‖_∞`).
    pub beta: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Max-norm ball radius, `β√r` by default.
    pub maxnorm_radius: f64,
    pub maxnorm_iterations: usize,
    /// Initial step multiplier for the max-norm solver (see [`MaxNormOptions`]).
    pub maxnorm_step: f64,
    /// Seeds the max-norm solver's random initialization.
    pub seed: RngSeed,
}

impl EstimatorConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            beta: 1.0,
            sigma: 0.0,
            maxnorm_radius: (rank as f64).sqrt(),
            maxnorm_iterations: 500,
            maxnorm_step: 1.0,
            seed: RngSeed(0),
        }
    }

    /// Sets `β` and resets the radius to `β√r`.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self.maxnorm_radius = beta * (self.rank as f64).sqrt();
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.maxnorm_radius = radius;
        self
    }

    pub fn with_seed(mut self, seed: RngSeed) -> Self {
        self.seed = seed;
        self
    }

    fn check_rank(&self, shape: (usize, usize)) -> Result<(), EstimatorError> {
        let max = shape.0.min(shape.1);
        if self.rank == 0 || self.rank > max {
            return Err(EstimatorError::InvalidConfig(format!(
                "rank {} outside 1..={max} for a {}x{} problem",
                self.rank, shape.0, shape.1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DebiasedRank,
    StandardRank,
    DebiasedMaxNorm,
    Proportional,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::DebiasedRank => "debiased",
            Method::StandardRank => "standard",
            Method::DebiasedMaxNorm => "debiased_maxnorm",
            Method::Proportional => "proportional",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub m_hat: DenseMatrix,
    pub method: Method,
    pub diagnostics_used: Option<DiagnosticsReport>,
    /// Solver record for the max-norm estimator.
    pub solver: Option<MaxNormSolution>,
}

fn check_inputs(
    y: &ObservationMatrix,
    omega: &SamplePattern,
    w: Option<&WeightMatrix>,
) -> Result<(), EstimatorError> {
    if y.shape() != omega.shape() {
        return Err(EstimatorError::Shape(format!(
            "observation {:?} vs pattern {:?}",
            y.shape(),
            omega.shape()
        )));
    }
    if let Some(w) = w {
        if w.shape() != omega.shape() {
            return Err(EstimatorError::Shape(format!(
                "weight {:?} vs pattern {:?}",
                w.shape(),
                omega.shape()
            )));
        }
    }
    Ok(())
}

/// `M̂ = W^(−1/2) ∘ P_r(W^(−1/2) ∘ Y_Ω)` where `P_r` is the best rank-r
/// approximation.
pub fn debiased_rank_projection(
    y_omega: &ObservationMatrix,
    omega: &SamplePattern,
    w: &WeightMatrix,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    check_inputs(y_omega, omega, Some(w))?;
    cfg.check_rank(omega.shape())?;
    let inv_sqrt = w.inv_sqrt().ok_or(EstimatorError::WeightNotPositive)?;
    let a = inv_sqrt.hadamard_dense(y_omega.values())?;
    let x = truncated_svd(&a, cfg.rank)?.reconstruct();
    Ok(Estimate {
        m_hat: inv_sqrt.hadamard_dense(&x)?,
        method: Method::DebiasedRank,
        diagnostics_used: None,
        solver: None,
    })
}

/// Rank-r truncated SVD of `Y_Ω / p` with `p = |Ω| / (d₁d₂)`.
pub fn standard_rank_projection(
    y_omega: &ObservationMatrix,
    omega: &SamplePattern,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    check_inputs(y_omega, omega, None)?;
    cfg.check_rank(omega.shape())?;
    if omega.is_empty() {
        return Err(EstimatorError::EmptyPattern);
    }
    let (d1, d2) = omega.shape();
    let inv_p = (d1 * d2) as f64 / omega.len() as f64;
    let a = y_omega.values().scale(inv_p);
    Ok(Estimate {
        m_hat: truncated_svd(&a, cfg.rank)?.reconstruct(),
        method: Method::StandardRank,
        diagnostics_used: None,
        solver: None,
    })
}
