//! Experiment configuration: presets, TOML overrides and validation.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wmc_core::patterns::{RatingsFormat, WeightFamilySpec};

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    RealPattern,
    SampleW,
    SpectralGap,
    Certify,
    Proportional,
}

impl ExperimentKind {
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::RealPattern => "real_pattern",
            ExperimentKind::SampleW => "sample_w",
            ExperimentKind::SpectralGap => "spectral_gap",
            ExperimentKind::Certify => "certify",
            ExperimentKind::Proportional => "proportional",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Desk,
    Paper,
}

/// Everything a run depends on. Fields unused by an experiment are ignored.
///
/// `trials` is the number of data matrices `N`. `noise_repeats` is `T`: noise
/// draws per data matrix for `real_pattern`, and pattern (or graph) draws for
/// `sample_w` and `spectral_gap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: usize,
    /// Vertex count of each graph factor.
    pub k: usize,
    pub rank: usize,
    pub rank_grid: Vec<usize>,
    pub rho_grid: Vec<usize>,
    pub m_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// `sample_w` also runs the flat weight `y = √m/d` at every `m`.
    pub flat_sweep: bool,
    pub trials: usize,
    pub noise_repeats: usize,
    pub sigma: f64,
    /// Entry scale used when evaluating the bounds in `certify`.
    pub beta: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub dataset_format: Option<RatingsFormat>,
    /// Users kept after ingestion (uniform, seeded); all when absent.
    #[serde(default)]
    pub subsample_users: Option<usize>,
    pub min_user_ratings: usize,
    pub min_item_ratings: usize,
    #[serde(default)]
    pub pattern: Option<PathBuf>,
    #[serde(default)]
    pub weight: Option<PathBuf>,
    pub maxnorm_iterations: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind, preset: Preset) -> Self {
        let mut c = Self {
            experiment: kind,
            d: 200,
            k: 24,
            rank: 5,
            rank_grid: (1..=10).collect(),
            rho_grid: vec![4, 8, 12],
            m_grid: Vec::new(),
            y_grid: Vec::new(),
            flat_sweep: false,
            trials: 10,
            noise_repeats: 5,
            sigma: 1.0,
            beta: 1.0,
            master_seed: 1,
            dataset: None,
            dataset_format: None,
            subsample_users: None,
            min_user_ratings: 1,
            min_item_ratings: 1,
            pattern: None,
            weight: None,
            maxnorm_iterations: 2000,
            output: None,
        };
        match (kind, preset) {
            (ExperimentKind::RealPattern, Preset::Desk) => {
                c.subsample_users = Some(2000);
            }
            (ExperimentKind::RealPattern, Preset::Paper) => {
                c.trials = 50;
                c.noise_repeats = 25;
            }
            (ExperimentKind::SampleW, Preset::Desk) => {
                c.m_grid = vec![4400.0, 6000.0, 8000.0, 10000.0];
                c.y_grid = vec![0.10, 0.12, 0.14, 0.16];
                c.flat_sweep = true;
                c.trials = 8;
                c.noise_repeats = 8;
            }
            (ExperimentKind::SampleW, Preset::Paper) => {
                c.d = 1000;
                c.rank = 10;
                c.m_grid = vec![27631.0, 77045.0, 150000.0, 250000.0];
                c.y_grid = vec![0.045, 0.058, 0.070, 0.083];
                c.flat_sweep = true;
                c.trials = 15;
                c.noise_repeats = 15;
            }
            (ExperimentKind::SpectralGap, Preset::Desk) => {
                c.trials = 4;
                c.noise_repeats = 8;
            }
            (ExperimentKind::SpectralGap, Preset::Paper) => {
                c.k = 50;
                c.rank = 10;
                c.rho_grid = (1..=10).map(|h| 2 * h).collect();
                c.trials = 15;
                c.noise_repeats = 15;
            }
            (ExperimentKind::Proportional, p) => {
                c.d = if p == Preset::Desk { 120 } else { 300 };
                c.rank = 3;
                let cells = (c.d * c.d) as f64;
                c.m_grid = [0.2, 0.3, 0.45, 0.65, 0.9].iter().map(|f| f * cells).collect();
                c.trials = if p == Preset::Desk { 4 } else { 10 };
                c.noise_repeats = 1;
                c.sigma = 0.0;
            }
            (ExperimentKind::Certify, _) => {
                c.rank = 1;
                c.trials = 1;
                c.noise_repeats = 1;
            }
        }
        c
    }

    /// Preset values overlaid with the keys of a TOML document.
    pub fn resolve(kind: ExperimentKind, preset: Preset, overrides: Option<&str>) -> Result<Self, HarnessError> {
        Self::resolve_with(kind, preset, overrides, |_| {})
    }

    /// As [`resolve`](Self::resolve), with `adjust` applied last (command-line
    /// flags) before validation.
    pub fn resolve_with(
        kind: ExperimentKind,
        preset: Preset,
        overrides: Option<&str>,
        adjust: impl FnOnce(&mut Self),
    ) -> Result<Self, HarnessError> {
        let mut cfg = Self::preset(kind, preset);
        if let Some(text) = overrides {
            let user: toml::Table = text
                .parse()
                .map_err(|e| HarnessError::Config(format!("config is not valid TOML: {e}")))?;
            if let Some(v) = user.get("experiment") {
                if v.as_str() != Some(kind.id()) {
                    return Err(HarnessError::Config(format!(
                        "config names experiment {v}, but {} was requested",
                        kind.id()
                    )));
                }
            }
            let mut table = toml::Table::try_from(&cfg)
                .map_err(|e| HarnessError::Config(format!("cannot encode preset: {e}")))?;
            table.extend(user);
            cfg = toml::Value::Table(table)
                .try_into()
                .map_err(|e| HarnessError::Config(format!("bad config: {e}")))?;
        }
        adjust(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 || self.noise_repeats == 0 {
            return bad("trials and noise_repeats must be at least 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        match self.experiment {
            ExperimentKind::RealPattern => {
                if self.rank_grid.is_empty() || self.rank_grid.contains(&0) {
                    return bad("rank_grid must be nonempty with positive ranks".into());
                }
                if self.dataset.is_none() || self.dataset_format.is_none() {
                    return bad("real_pattern needs dataset and dataset_format".into());
                }
            }
            ExperimentKind::SampleW => {
                if self.m_grid.is_empty() || self.y_grid.is_empty() {
                    return bad("sample_w needs nonempty m_grid and y_grid".into());
                }
                if self.d % 2 != 0 || self.rank == 0 || self.rank > self.d {
                    return bad(format!("sample_w needs even d >= rank >= 1, got d = {}, rank = {}", self.d, self.rank));
                }
                for &m in &self.m_grid {
                    let flat = self.flat_sweep.then(|| WeightFamilySpec::flat_y(self.d, m));
                    for &y in self.y_grid.iter().chain(flat.iter()) {
                        let f = WeightFamilySpec::new(self.d, m, y).f();
                        if !(f > 0.0 && f <= 1.0 && y > 0.0 && y <= 1.0) {
                            return bad(format!("(m, y) = ({m}, {y}) gives plateau heights ({f}, {y}) outside (0, 1]"));
                        }
                    }
                }
            }
            ExperimentKind::SpectralGap => {
                if self.rho_grid.is_empty() {
                    return bad("rho_grid must be nonempty".into());
                }
                for &rho in &self.rho_grid {
                    if rho == 0 || rho % 2 != 0 || rho >= self.k {
                        return bad(format!(
                            "rho = {rho}: the band factor needs even rho with 2 <= rho < k = {}",
                            self.k
                        ));
                    }
                }
                if self.rank == 0 || self.rank > self.k * self.k {
                    return bad(format!("rank {} out of range for k = {}", self.rank, self.k));
                }
            }
            ExperimentKind::Proportional => {
                if self.m_grid.is_empty() {
                    return bad("proportional needs a nonempty m_grid".into());
                }
                if self.rank == 0 || self.rank > self.d {
                    return bad(format!("rank {} out of range for d = {}", self.rank, self.d));
                }
                let cells = (self.d * self.d) as f64;
                if let Some(m) = self.m_grid.iter().find(|&&m| !(m > 0.0 && m <= cells)) {
                    return bad(format!("budget m = {m} must lie in (0, d^2 = {cells}]"));
                }
                if self.maxnorm_iterations == 0 {
                    return bad("maxnorm_iterations must be positive".into());
                }
            }
            ExperimentKind::Certify => {
                if self.pattern.is_none() {
                    return bad("certify needs a pattern file".into());
                }
                if self.rank == 0 {
                    return bad("rank must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML encoding, excluding the output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let text = toml::to_string(&c).expect("config encodes as TOML");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in [ExperimentKind::SampleW, ExperimentKind::SpectralGap, ExperimentKind::Proportional] {
            for preset in [Preset::Desk, Preset::Paper] {
                ExperimentConfig::preset(kind, preset).validate().unwrap();
            }
        }
        assert!(ExperimentConfig::preset(ExperimentKind::RealPattern, Preset::Desk).validate().is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = ExperimentConfig::resolve(
            ExperimentKind::SampleW,
            Preset::Desk,
            Some("trials = 2\nm_grid = [5000.0]\n"),
        )
        .unwrap();
        assert_eq!(cfg.trials, 2);
        assert_eq!(cfg.m_grid, vec![5000.0]);
        assert_eq!(cfg.d, 200);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        for text in ["trials = 0", "unknown_key = 3", "experiment = \"proportional\"", "trials = [", "y_grid = [0.9]"] {
            let err = ExperimentConfig::resolve(ExperimentKind::SampleW, Preset::Desk, Some(text)).unwrap_err();
            assert!(matches!(err, HarnessError::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn hash_ignores_output() {
        let a = ExperimentConfig::preset(ExperimentKind::SampleW, Preset::Desk);
        let mut b = a.clone();
        b.output = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
