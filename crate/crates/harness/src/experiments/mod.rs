//! The five experiments. Each returns rows plus the CSV header describing how
//! they were aggregated.

mod certify;
mod proportional;
mod real_pattern;
mod sample_w;
mod spectral_gap;

pub use certify::{certify, CertifyRecord};

use wmc_core::diagnostics::{compute_mu, diagnose, unweighted_error, weighted_error, DiagnosticsError, DiagnosticsReport};
use wmc_core::estimators::{debiased_rank_projection, standard_rank_projection, EstimatorConfig, ObservationMatrix};
use wmc_core::linalg::{gaussian_matrix, DenseMatrix, RngSeed};
use wmc_core::pattern::SamplePattern;
use wmc_core::weight::WeightMatrix;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::results::{CsvHeader, ResultRow};
use crate::seeds::derive_seed;
use crate::stats::mean_std;
use crate::{HarnessError, GIT_REVISION};

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub header: CsvHeader,
    pub rows: Vec<ResultRow>,
}

/// Runs a grid experiment. `certify` produces a JSON record instead; see
/// [`certify`].
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    let (rows, aggregation) = match cfg.experiment {
        ExperimentKind::RealPattern => (real_pattern::run(cfg)?, real_pattern::AGGREGATION),
        ExperimentKind::SampleW => (sample_w::run(cfg)?, sample_w::AGGREGATION),
        ExperimentKind::SpectralGap => (spectral_gap::run(cfg)?, spectral_gap::AGGREGATION),
        ExperimentKind::Proportional => (proportional::run(cfg)?, proportional::AGGREGATION),
        ExperimentKind::Certify => {
            return Err(HarnessError::Config(
                "certify writes a JSON record; use `mc certify`".into(),
            ))
        }
    };
    Ok(ExperimentOutput {
        header: CsvHeader {
            experiment: cfg.experiment.id().to_string(),
            config_hash: cfg.hash(),
            git_revision: GIT_REVISION.to_string(),
            master_seed: cfg.master_seed,
            aggregation: aggregation.to_string(),
        },
        rows,
    })
}

/// Seeds for one experiment run.
pub(crate) struct Seeds<'a> {
    master: u64,
    experiment: &'a str,
}

impl<'a> Seeds<'a> {
    pub(crate) fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            master: cfg.master_seed,
            experiment: cfg.experiment.id(),
        }
    }

    pub(crate) fn get(&self, label: &str, indices: &[u64]) -> RngSeed {
        derive_seed(self.master, self.experiment, label, indices)
    }

    /// Seeds for the two factors of data matrix `n`.
    pub(crate) fn data(&self, n: usize) -> [RngSeed; 2] {
        [self.get("data", &[n as u64, 0]), self.get("data", &[n as u64, 1])]
    }

    /// Seeds for data matrix `n` of pattern draw `t`.
    pub(crate) fn data_draw(&self, t: usize, n: usize) -> [RngSeed; 2] {
        let (t, n) = (t as u64, n as u64);
        [self.get("data", &[t, n, 0]), self.get("data", &[t, n, 1])]
    }

    pub(crate) fn key(&self, cell: &str) -> String {
        format!("{}/{}/{cell}", self.master, self.experiment)
    }
}

/// `X = U Vᵀ` with standard normal `U ∈ ℝ^(d₁×r)`, `V ∈ ℝ^(d₂×r)`.
pub(crate) fn gaussian_low_rank(
    d1: usize,
    d2: usize,
    r: usize,
    seeds: [RngSeed; 2],
) -> Result<DenseMatrix, HarnessError> {
    let u = gaussian_matrix(d1, r, 1.0, seeds[0])?;
    let vt = gaussian_matrix(r, d2, 1.0, seeds[1])?;
    Ok(u.matmul(&vt)?)
}

/// `Y = 1_Ω ∘ (X + σZ)`.
pub(crate) fn observe(
    x: &DenseMatrix,
    omega: &SamplePattern,
    sigma: f64,
    seed: RngSeed,
) -> Result<ObservationMatrix, HarnessError> {
    let (d1, d2) = x.shape();
    let noise = if sigma > 0.0 { Some(gaussian_matrix(d1, d2, sigma, seed)?) } else { None };
    Ok(ObservationMatrix::observe(x, noise.as_ref(), omega)?)
}

/// Weighted and unweighted error of one estimate.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Errors {
    pub weighted: f64,
    pub unweighted: f64,
}

/// Debiased and standard estimates from the same observations.
pub(crate) fn paired_errors(
    x: &DenseMatrix,
    y: &ObservationMatrix,
    omega: &SamplePattern,
    w: &WeightMatrix,
    rank: usize,
) -> Result<[Errors; 2], HarnessError> {
    let cfg = EstimatorConfig::new(rank);
    let debiased = debiased_rank_projection(y, omega, w, &cfg)?.m_hat;
    let standard = standard_rank_projection(y, omega, &cfg)?.m_hat;
    let score = |m_hat: &DenseMatrix| -> Result<Errors, HarnessError> {
        Ok(Errors {
            weighted: weighted_error(w, x, m_hat)?,
            unweighted: unweighted_error(x, m_hat)?,
        })
    };
    Ok([score(&debiased)?, score(&standard)?])
}

pub(crate) const METHODS: [&str; 2] = ["debiased", "standard"];

/// Per-method error samples along the aggregation axis.
#[derive(Clone, Debug, Default)]
pub(crate) struct ErrorSamples {
    pub weighted: [Vec<f64>; 2],
    pub unweighted: [Vec<f64>; 2],
}

impl ErrorSamples {
    /// Adds the mean of `inner` as one sample.
    pub(crate) fn push_mean(&mut self, inner: &[[Errors; 2]]) {
        for k in 0..2 {
            let we: Vec<f64> = inner.iter().map(|e| e[k].weighted).collect();
            let ue: Vec<f64> = inner.iter().map(|e| e[k].unweighted).collect();
            self.weighted[k].push(mean_std(&we).0);
            self.unweighted[k].push(mean_std(&ue).0);
        }
    }
}

/// Diagnostics of a pattern, averaged when a row spans several patterns.
#[derive(Clone, Debug, Default)]
pub(crate) struct Snapshot {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
    mass: Vec<f64>,
    count: Vec<f64>,
}

impl Snapshot {
    /// Diagnoses `(Ω, W)`. Patterns over the dense limit skip `λ`, `λ₁`
    /// and `λ₂`.
    pub(crate) fn record(&mut self, omega: &SamplePattern, w: &WeightMatrix) -> Result<(), HarnessError> {
        match diagnose(omega, w) {
            Ok(r) => self.push(&r),
            Err(DiagnosticsError::Capacity { .. }) => {
                self.mu.push(compute_mu(omega, w)?);
                self.mass.push(w.total());
                self.count.push(omega.len() as f64);
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }

    fn push(&mut self, r: &DiagnosticsReport) {
        self.lambda.push(r.lambda);
        self.mu.push(r.mu);
        self.lambda1.extend(r.lambda1);
        self.lambda2.extend(r.lambda2);
        self.mass.push(r.m);
        self.count.push(r.sample_count as f64);
    }

    pub(crate) fn extend(&mut self, other: &Snapshot) {
        self.lambda.extend_from_slice(&other.lambda);
        self.mu.extend_from_slice(&other.mu);
        self.lambda1.extend_from_slice(&other.lambda1);
        self.lambda2.extend_from_slice(&other.lambda2);
        self.mass.extend_from_slice(&other.mass);
        self.count.extend_from_slice(&other.count);
    }

    /// A row with the snapshot filled in and errors taken from `samples`
    /// for method `k`.
    pub(crate) fn row(&self, base: &ResultRow, samples: &ErrorSamples, k: usize) -> ResultRow {
        let avg = |xs: &[f64]| if xs.is_empty() { None } else { Some(mean_std(xs).0) };
        let (we, we_sd) = mean_std(&samples.weighted[k]);
        let (ue, ue_sd) = mean_std(&samples.unweighted[k]);
        ResultRow {
            method: METHODS[k].to_string(),
            weighted_error_mean: we,
            weighted_error_std: we_sd,
            unweighted_error_mean: ue,
            unweighted_error_std: ue_sd,
            lambda: avg(&self.lambda),
            mu: avg(&self.mu),
            lambda1: avg(&self.lambda1),
            lambda2: avg(&self.lambda2),
            weight_mass: avg(&self.mass).unwrap_or(f64::NAN),
            sample_count: avg(&self.count).unwrap_or(f64::NAN),
            ..base.clone()
        }
    }
}

/// A row with only the coordinates set.
pub(crate) fn blank_row(experiment: &str, seed_key: String, cells: usize) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        rank: None,
        m: None,
        y: None,
        weight_family: None,
        rho: None,
        graph_kind: None,
        draw: None,
        method: String::new(),
        weighted_error_mean: f64::NAN,
        weighted_error_std: f64::NAN,
        unweighted_error_mean: f64::NAN,
        unweighted_error_std: f64::NAN,
        relative_error_mean: None,
        relative_error_std: None,
        lambda: None,
        mu: None,
        lambda1: None,
        lambda2: None,
        weight_mass: f64::NAN,
        sample_count: f64::NAN,
        expected_queries: None,
        clamped_entries: None,
        cells,
        seed_key,
    }
}
