//! `Ω ~ W` for two-plateau weights of varying flatness.

use wmc_core::patterns::{sample_bernoulli, spiky_weight, WeightFamilySpec};

use super::{blank_row, gaussian_low_rank, observe, paired_errors, ErrorSamples, Seeds, Snapshot};
use crate::config::ExperimentConfig;
use crate::results::ResultRow;
use crate::HarnessError;

pub(crate) const AGGREGATION: &str =
    "mean over N data matrices per pattern draw; mean and std over the T pattern draws";

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let seeds = Seeds::new(cfg);
    let d = cfg.d;
    let data = (0..cfg.trials)
        .map(|n| gaussian_low_rank(d, d, cfg.rank, seeds.data(n)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (mi, &m) in cfg.m_grid.iter().enumerate() {
        let mut ys: Vec<(f64, &str)> = cfg.y_grid.iter().map(|&y| (y, "spiky")).collect();
        if cfg.flat_sweep {
            ys.push((WeightFamilySpec::flat_y(d, m), "flat"));
        }
        for (yi, &(y, family)) in ys.iter().enumerate() {
            let w = spiky_weight(&WeightFamilySpec::new(d, m, y))
                .map_err(|e| HarnessError::from(e).context(&format!("weight for m = {m}, y = {y}")))?;
            let mut samples = ErrorSamples::default();
            let mut snapshot = Snapshot::default();
            for t in 0..cfg.noise_repeats {
                let idx = [mi as u64, yi as u64, t as u64];
                let omega = sample_bernoulli(&w, seeds.get("pattern", &idx))?;
                snapshot.record(&omega, &w)?;
                let mut inner = Vec::with_capacity(data.len());
                for (n, x) in data.iter().enumerate() {
                    let noise = seeds.get("noise", &[mi as u64, yi as u64, t as u64, n as u64]);
                    let y_obs = observe(x, &omega, cfg.sigma, noise)?;
                    inner.push(paired_errors(x, &y_obs, &omega, &w, cfg.rank)?);
                }
                samples.push_mean(&inner);
            }
            let mut base = blank_row(
                "sample_w",
                seeds.key(&format!("m{mi}-y{yi}")),
                cfg.trials * cfg.noise_repeats,
            );
            base.rank = Some(cfg.rank);
            base.m = Some(m);
            base.y = Some(y);
            base.weight_family = Some(family.to_string());
            rows.extend((0..2).map(|k| snapshot.row(&base, &samples, k)));
        }
    }
    Ok(rows)
}
