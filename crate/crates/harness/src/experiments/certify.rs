//! Certification record for a pattern file.

use serde::{Deserialize, Serialize};
use wmc_core::diagnostics::{best_rank1_weight, diagnose, plugin_bounds, DiagnosticsReport, PluginBounds};
use wmc_core::pattern::SamplePattern;
use wmc_core::weight::WeightMatrix;

use crate::config::ExperimentConfig;
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyRecord {
    #[serde(flatten)]
    pub report: DiagnosticsReport,
    pub bounds: PluginBounds,
    pub rank: usize,
    pub beta: f64,
    pub sigma: f64,
    /// `file` or `best_rank1`.
    pub weight_source: String,
}

/// Diagnoses `cfg.pattern` against `cfg.weight`, or its best rank-1
/// approximation when no weight file is given.
pub fn certify(cfg: &ExperimentConfig) -> Result<CertifyRecord, HarnessError> {
    let Some(path) = &cfg.pattern else {
        return Err(HarnessError::Config("certify needs a pattern file".into()));
    };
    let omega = SamplePattern::load(path)
        .map_err(|e| HarnessError::from(e).context(&format!("pattern {}", path.display())))?;
    let (w, weight_source) = match &cfg.weight {
        Some(wp) => (
            WeightMatrix::load(wp).map_err(|e| HarnessError::from(e).context(&format!("weight {}", wp.display())))?,
            "file",
        ),
        None => (best_rank1_weight(&omega)?, "best_rank1"),
    };
    let report = diagnose(&omega, &w)?;
    let bounds = plugin_bounds(&report, cfg.rank, cfg.beta, cfg.sigma)?;
    Ok(CertifyRecord {
        report,
        bounds,
        rank: cfg.rank,
        beta: cfg.beta,
        sigma: cfg.sigma,
        weight_source: weight_source.to_string(),
    })
}
