//! Patterns from Kronecker products of a circulant band `G_ρ` and a random
//! `ρ`-regular graph `G̃_ρ`.
//!
//! `G_ρ` joins each vertex to itself and its `ρ/2` neighbours on either side,
//! so every row has `ρ + 1` members.

use wmc_core::diagnostics::best_rank1_weight;
use wmc_core::linalg::DenseMatrix;
use wmc_core::pattern::SamplePattern;
use wmc_core::linalg::RngSeed;
use wmc_core::patterns::{circulant_band, random_regular, tensor_product, REGULAR_RESTARTS};

use super::{blank_row, gaussian_low_rank, observe, paired_errors, ErrorSamples, Errors, Seeds, Snapshot};
use crate::config::ExperimentConfig;
use crate::results::ResultRow;
use crate::HarnessError;

pub(crate) const AGGREGATION: &str = "rows with a draw index: mean and std over N data matrices for that graph draw; \
     rows without: mean over N per draw, then mean and std over the T graph draws";

pub const KINDS: [&str; 3] = ["band_band", "band_random", "random_random"];

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let seeds = Seeds::new(cfg);
    let k = cfg.k;
    let d = k * k;
    let mut rows = Vec::new();
    for (ri, &rho) in cfg.rho_grid.iter().enumerate() {
        let band = circulant_band(k, rho + 1)?;
        let mut totals: [(ErrorSamples, Snapshot); 3] = Default::default();
        let mut draw_rows: Vec<ResultRow> = Vec::new();
        for t in 0..cfg.noise_repeats {
            let random = connected_regular(k, rho, |attempt| seeds.get("graph", &[ri as u64, t as u64, attempt]))?;
            let data = (0..cfg.trials)
                .map(|n| gaussian_low_rank(d, d, cfg.rank, seeds.data_draw(t, n)))
                .collect::<Result<Vec<DenseMatrix>, _>>()?;
            let patterns = [
                tensor_product(&band, &band)?,
                tensor_product(&band, &random)?,
                tensor_product(&random, &random)?,
            ];
            for (ki, omega) in patterns.iter().enumerate() {
                let (samples, snapshot) = run_draw(cfg, &seeds, omega, &data, ri, t)?;
                let mut base = blank_row("spectral_gap", seeds.key(&format!("rho{ri}-{}-t{t}", KINDS[ki])), cfg.trials);
                base.rank = Some(cfg.rank);
                base.rho = Some(rho);
                base.graph_kind = Some(KINDS[ki].to_string());
                base.draw = Some(t);
                draw_rows.extend((0..2).map(|m| snapshot.row(&base, &samples, m)));

                let (agg, snap) = &mut totals[ki];
                for m in 0..2 {
                    let (mean_w, _) = crate::stats::mean_std(&samples.weighted[m]);
                    let (mean_u, _) = crate::stats::mean_std(&samples.unweighted[m]);
                    agg.weighted[m].push(mean_w);
                    agg.unweighted[m].push(mean_u);
                }
                snap.extend(&snapshot);
            }
        }
        for (ki, (agg, snap)) in totals.iter().enumerate() {
            let mut base = blank_row(
                "spectral_gap",
                seeds.key(&format!("rho{ri}-{}", KINDS[ki])),
                cfg.trials * cfg.noise_repeats,
            );
            base.rank = Some(cfg.rank);
            base.rho = Some(rho);
            base.graph_kind = Some(KINDS[ki].to_string());
            rows.extend((0..2).map(|m| snap.row(&base, agg, m)));
        }
        rows.extend(draw_rows);
    }
    Ok(rows)
}

/// Both estimators on every data matrix for one pattern. Each data matrix is
/// one sample.
fn run_draw(
    cfg: &ExperimentConfig,
    seeds: &Seeds,
    omega: &SamplePattern,
    data: &[DenseMatrix],
    ri: usize,
    t: usize,
) -> Result<(ErrorSamples, Snapshot), HarnessError> {
    let w = best_rank1_weight(omega)?;
    let mut snapshot = Snapshot::default();
    snapshot.record(omega, &w)?;
    let mut samples = ErrorSamples::default();
    for (n, x) in data.iter().enumerate() {
        // the same noise for all three kinds keeps the comparison paired
        let noise = seeds.get("noise", &[ri as u64, t as u64, n as u64]);
        let y = observe(x, omega, cfg.sigma, noise)?;
        let e: [Errors; 2] = paired_errors(x, &y, omega, &w, cfg.rank)?;
        samples.push_mean(&[e]);
    }
    Ok((samples, snapshot))
}

/// A random `ρ`-regular graph, redrawn until connected. A disconnected
/// regular graph has `λ₂ = λ₁` and no positive Perron vector.
fn connected_regular(k: usize, rho: usize, seed: impl Fn(u64) -> RngSeed) -> Result<SamplePattern, HarnessError> {
    for attempt in 0..REGULAR_RESTARTS as u64 {
        let g = random_regular(k, rho, seed(attempt))
            .map_err(|e| HarnessError::from(e).context(&format!("{rho}-regular graph on {k} vertices")))?;
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(HarnessError::Numerical(format!(
        "no connected {rho}-regular graph on {k} vertices in {REGULAR_RESTARTS} draws"
    )))
}

fn is_connected(g: &SamplePattern) -> bool {
    let n = g.rows();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in g.row(v) {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity() {
        let two_triangles =
            SamplePattern::from_pairs(6, 6, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0), (3, 4), (4, 3), (4, 5), (5, 4), (3, 5), (5, 3)])
                .unwrap();
        assert!(!is_connected(&two_triangles));
        assert!(is_connected(&circulant_band(7, 3).unwrap()));
        for t in 0..20 {
            let g = connected_regular(9, 2, |a| RngSeed(100 * t + a)).unwrap();
            assert!(is_connected(&g));
            assert!(g.row_counts().iter().all(|&c| c == 2));
        }
    }
}
