//! Recovery of a flat matrix from entries queried in proportion to its own
//! leverage factors, over a grid of query budgets.

use wmc_core::diagnostics::{unweighted_error, weighted_error};
use wmc_core::estimators::{proportional_sampling_recovery_with, ProportionalOptions};
use wmc_core::linalg::{gaussian_matrix, DenseMatrix, RngSeed};

use super::{blank_row, Seeds, Snapshot};
use crate::config::ExperimentConfig;
use crate::results::ResultRow;
use crate::stats::mean_std;
use crate::HarnessError;

pub(crate) const AGGREGATION: &str = "mean and std over the N data matrices (one query pattern each)";

/// `X = Σ_l a_l b_lᵀ` over `r` pairs of random sign vectors.
pub(crate) fn rademacher_low_rank(d: usize, r: usize, seeds: [RngSeed; 2]) -> Result<DenseMatrix, HarnessError> {
    let signs = |g: DenseMatrix| DenseMatrix::from_fn(g.rows(), g.cols(), |i, j| if g.get(i, j) < 0.0 { -1.0 } else { 1.0 });
    let a = signs(gaussian_matrix(d, r, 1.0, seeds[0])?);
    let b = signs(gaussian_matrix(r, d, 1.0, seeds[1])?);
    Ok(a.matmul(&b)?)
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let seeds = Seeds::new(cfg);
    let data = (0..cfg.trials)
        .map(|n| rademacher_low_rank(cfg.d, cfg.rank, seeds.data(n)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (mi, &m) in cfg.m_grid.iter().enumerate() {
        let (mut rel, mut we, mut ue, mut queries) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut clamped = 0;
        let mut snapshot = Snapshot::default();
        for (n, x) in data.iter().enumerate() {
            let idx = [mi as u64, n as u64];
            let opts = ProportionalOptions {
                iterations: cfg.maxnorm_iterations,
                solver_seed: seeds.get("solver", &idx),
                ..ProportionalOptions::default()
            };
            let out = proportional_sampling_recovery_with(x, m, seeds.get("pattern", &idx), &opts)
                .map_err(|e| HarnessError::from(e).context(&format!("budget m = {m}, trial {n}")))?;
            rel.push(out.x_hat.sub(x)?.frobenius_norm() / x.frobenius_norm());
            we.push(weighted_error(&out.weight, x, &out.x_hat)?);
            ue.push(unweighted_error(x, &out.x_hat)?);
            queries.push(out.expected_queries);
            clamped = clamped.max(out.clamped_entries);
            snapshot.record(&out.queried, &out.weight)?;
        }
        let mut base = blank_row("proportional", seeds.key(&format!("m{mi}")), cfg.trials);
        base.rank = Some(cfg.rank);
        base.m = Some(m);
        let mut row = snapshot.row(&base, &Default::default(), 0);
        row.method = "proportional".into();
        (row.weighted_error_mean, row.weighted_error_std) = mean_std(&we);
        (row.unweighted_error_mean, row.unweighted_error_std) = mean_std(&ue);
        let (r_mean, r_std) = mean_std(&rel);
        row.relative_error_mean = Some(r_mean);
        row.relative_error_std = Some(r_std);
        row.expected_queries = Some(mean_std(&queries).0);
        row.clamped_entries = Some(clamped);
        rows.push(row);
    }
    Ok(rows)
}
