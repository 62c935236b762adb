//! Synthetic low-rank data observed on a pattern read from a ratings file.

use wmc_core::diagnostics::best_rank1_weight;
use wmc_core::pattern::SamplePattern;
use wmc_core::patterns::{density_filter, ingest_ratings, subsample_rows};

use super::{blank_row, gaussian_low_rank, observe, paired_errors, ErrorSamples, Seeds, Snapshot};
use crate::config::ExperimentConfig;
use crate::results::ResultRow;
use crate::HarnessError;

pub(crate) const AGGREGATION: &str =
    "mean over T noise draws per data matrix; mean and std over the N data matrices";

/// Reads the ratings file, subsamples users, then applies the density filter.
pub fn load_pattern(cfg: &ExperimentConfig, seeds: &Seeds) -> Result<SamplePattern, HarnessError> {
    let (Some(path), Some(format)) = (&cfg.dataset, cfg.dataset_format) else {
        return Err(HarnessError::Config("real_pattern needs dataset and dataset_format".into()));
    };
    let ingested = ingest_ratings(path, format)
        .map_err(|e| HarnessError::from(e).context(&format!("reading {}", path.display())))?;
    let mut omega = ingested.pattern;
    if let Some(n) = cfg.subsample_users {
        omega = subsample_rows(&omega, n, seeds.get("subsample", &[])).0;
    }
    let (omega, _, _) = density_filter(&omega, cfg.min_user_ratings.max(1), cfg.min_item_ratings.max(1));
    if omega.is_empty() {
        return Err(HarnessError::Data(format!("{}: no ratings left after filtering", path.display())));
    }
    Ok(omega)
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let seeds = Seeds::new(cfg);
    let omega = load_pattern(cfg, &seeds)?;
    run_on(cfg, &seeds, &omega)
}

pub(crate) fn run_on(cfg: &ExperimentConfig, seeds: &Seeds, omega: &SamplePattern) -> Result<Vec<ResultRow>, HarnessError> {
    let (d1, d2) = omega.shape();
    let w = best_rank1_weight(omega)?;
    let mut snapshot = Snapshot::default();
    snapshot.record(omega, &w)?;

    let mut rows = Vec::new();
    for (ri, &rank) in cfg.rank_grid.iter().enumerate() {
        if rank > d1.min(d2) {
            return Err(HarnessError::Config(format!("rank {rank} exceeds the {d1}x{d2} pattern")));
        }
        let mut samples = ErrorSamples::default();
        for n in 0..cfg.trials {
            let x = gaussian_low_rank(d1, d2, rank, [
                seeds.get("data", &[ri as u64, n as u64, 0]),
                seeds.get("data", &[ri as u64, n as u64, 1]),
            ])?;
            let mut inner = Vec::with_capacity(cfg.noise_repeats);
            for t in 0..cfg.noise_repeats {
                let y = observe(&x, omega, cfg.sigma, seeds.get("noise", &[ri as u64, n as u64, t as u64]))?;
                inner.push(paired_errors(&x, &y, omega, &w, rank)?);
            }
            samples.push_mean(&inner);
        }
        let mut base = blank_row("real_pattern", seeds.key(&format!("r{rank}")), cfg.trials * cfg.noise_repeats);
        base.rank = Some(rank);
        rows.extend((0..2).map(|k| snapshot.row(&base, &samples, k)));
    }
    Ok(rows)
}
