//! Seeded experiment driver for weighted matrix completion.
//!
//! Each experiment turns an [`ExperimentConfig`] into a list of
//! [`ResultRow`]s; [`write_csv`] serializes them with a `#` header recording
//! the config hash, git revision and aggregation axis.

pub mod config;
pub mod experiments;
pub mod figures;
pub mod results;
pub mod seeds;
pub mod stats;

pub use config::{ExperimentConfig, ExperimentKind, Preset};
pub use experiments::{certify, run, CertifyRecord, ExperimentOutput};
pub use results::{read_csv, write_csv, CsvHeader, ResultRow};

use thiserror::Error;
use wmc_core::diagnostics::DiagnosticsError;
use wmc_core::estimators::EstimatorError;
use wmc_core::linalg::LinalgError;
use wmc_core::pattern::PatternError;
use wmc_core::weight::WeightError;

/// Revision of the source tree this binary was built from.
pub const GIT_REVISION: &str = env!("WMC_GIT_REVISION");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 config, 3 data (including IO), 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) | HarnessError::Io(_) => 3,
            HarnessError::Numerical(_) => 4,
        }
    }

    pub(crate) fn context(self, what: &str) -> Self {
        match self {
            HarnessError::Config(m) => HarnessError::Config(format!("{what}: {m}")),
            HarnessError::Data(m) => HarnessError::Data(format!("{what}: {m}")),
            HarnessError::Numerical(m) => HarnessError::Numerical(format!("{what}: {m}")),
            io => io,
        }
    }
}

impl From<LinalgError> for HarnessError {
    fn from(e: LinalgError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<PatternError> for HarnessError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::Domain(_) => HarnessError::Config(e.to_string()),
            PatternError::RetriesExhausted { .. } => HarnessError::Numerical(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}

impl From<WeightError> for HarnessError {
    fn from(e: WeightError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<DiagnosticsError> for HarnessError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Linalg(e) => e.into(),
            DiagnosticsError::Pattern(e) => e.into(),
            DiagnosticsError::Weight(e) => e.into(),
            DiagnosticsError::NotNonnegative { .. } => HarnessError::Numerical(e.to_string()),
            DiagnosticsError::InvalidArgument(_) => HarnessError::Config(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}

impl From<EstimatorError> for HarnessError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Linalg(e) => e.into(),
            EstimatorError::Pattern(e) => e.into(),
            EstimatorError::Divergence { .. } => HarnessError::Numerical(e.to_string()),
            EstimatorError::InvalidConfig(_) => HarnessError::Config(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}
