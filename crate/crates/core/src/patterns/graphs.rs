//! Graph adjacency patterns: circulant bands, random regular graphs, and
//! Kronecker products of those.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::RngSeed;
use crate::pattern::{PatternError, SamplePattern};

/// Restarts allowed before random regular generation gives up.
pub const REGULAR_RESTARTS: usize = 1000;
/// Rejected random pairings tolerated before switching to explicit enumeration.
const PAIRING_REJECTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    CirculantBand,
    RandomRegular,
    TensorProduct,
}

/// Recipe for a square symmetric pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    /// Vertex count (for products, the product of the factor counts).
    pub k: usize,
    /// Row count of the pattern: `t` for a band, `ρ` for a regular graph.
    pub rho: usize,
    pub sub_specs: Option<Box<(GraphSpec, GraphSpec)>>,
    pub seed: Option<RngSeed>,
}

impl GraphSpec {
    pub fn circulant(k: usize, t: usize) -> Self {
        Self {
            kind: GraphKind::CirculantBand,
            k,
            rho: t,
            sub_specs: None,
            seed: None,
        }
    }

    pub fn random_regular(k: usize, rho: usize, seed: RngSeed) -> Self {
        Self {
            kind: GraphKind::RandomRegular,
            k,
            rho,
            sub_specs: None,
            seed: Some(seed),
        }
    }

    pub fn tensor(a: GraphSpec, b: GraphSpec) -> Self {
        Self {
            kind: GraphKind::TensorProduct,
            k: a.k * b.k,
            rho: a.rho * b.rho,
            sub_specs: Some(Box::new((a, b))),
            seed: None,
        }
    }

    pub fn build(&self) -> Result<SamplePattern, PatternError> {
        match self.kind {
            GraphKind::CirculantBand => circulant_band(self.k, self.rho),
            GraphKind::RandomRegular => {
                let seed = self.seed.ok_or_else(|| {
                    PatternError::Domain("random regular spec needs a seed".into())
                })?;
                random_regular(self.k, self.rho, seed)
            }
            GraphKind::TensorProduct => {
                let subs = self.sub_specs.as_ref().ok_or_else(|| {
                    PatternError::Domain("tensor product spec needs two factors".into())
                })?;
                tensor_product(&subs.0.build()?, &subs.1.build()?)
            }
        }
    }
}

/// Symmetric circulant band: row `i` holds columns `i − (t−1)/2 ..= i + (t−1)/2` mod `d`.
pub fn circulant_band(d: usize, t: usize) -> Result<SamplePattern, PatternError> {
    if t % 2 == 0 || t == 0 || t > d {
        return Err(PatternError::Domain(format!(
            "band width must be odd with 1 <= t <= d; got t = {t}, d = {d}"
        )));
    }
    let h = (t - 1) / 2;
    let pairs = (0..d).flat_map(|i| (0..t).map(move |o| (i, (i + d + o - h) % d)));
    SamplePattern::from_pairs(d, d, pairs)
}

/// Uniform-ish random simple `ρ`-regular graph on `k` vertices.
///
/// Stubs are paired one edge at a time, rejecting loops and repeated edges.
/// When random picks keep failing, the remaining valid pairs are enumerated
/// and one is drawn by stub weight; if none is left the attempt restarts.
pub fn random_regular(k: usize, rho: usize, seed: RngSeed) -> Result<SamplePattern, PatternError> {
    if rho >= k.max(1) || (k * rho) % 2 != 0 {
        return Err(PatternError::Domain(format!(
            "no simple {rho}-regular graph on {k} vertices (need rho < k and k*rho even)"
        )));
    }
    let mut rng = seed.rng();
    for _ in 0..REGULAR_RESTARTS {
        if let Some(edges) = try_pairing(k, rho, &mut rng) {
            let pairs = edges.into_iter().flat_map(|(u, v)| [(u, v), (v, u)]);
            return SamplePattern::from_pairs(k, k, pairs);
        }
    }
    Err(PatternError::RetriesExhausted {
        attempts: REGULAR_RESTARTS,
        what: format!("random {rho}-regular graph on {k} vertices"),
    })
}

fn try_pairing(k: usize, rho: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut adjacent = vec![false; k * k];
    let mut remaining = vec![rho; k];
    let mut stubs: Vec<usize> = (0..k).flat_map(|v| std::iter::repeat_n(v, rho)).collect();
    let mut edges = Vec::with_capacity(k * rho / 2);

    while !stubs.is_empty() {
        let mut picked = None;
        for _ in 0..PAIRING_REJECTS {
            let a = rng.random_range(0..stubs.len());
            let b = rng.random_range(0..stubs.len());
            let (u, v) = (stubs[a], stubs[b]);
            if a != b && u != v && !adjacent[u * k + v] {
                picked = Some((u, v));
                break;
            }
        }
        let (u, v) = match picked {
            Some(p) => p,
            None => {
                let mut candidates = Vec::new();
                let mut total = 0usize;
                for u in 0..k {
                    for v in (u + 1)..k {
                        if remaining[u] > 0 && remaining[v] > 0 && !adjacent[u * k + v] {
                            total += remaining[u] * remaining[v];
                            candidates.push((u, v, total));
                        }
                    }
                }
                if candidates.is_empty() {
                    return None;
                }
                let x = rng.random_range(0..total);
                let idx = candidates.partition_point(|c| c.2 <= x);
                (candidates[idx].0, candidates[idx].1)
            }
        };
        adjacent[u * k + v] = true;
        adjacent[v * k + u] = true;
        remaining[u] -= 1;
        remaining[v] -= 1;
        for x in [u, v] {
            let pos = stubs.iter().position(|&s| s == x).expect("stub present");
            stubs.swap_remove(pos);
        }
        edges.push((u.min(v), u.max(v)));
    }
    Some(edges)
}

/// Kronecker product of two square symmetric patterns: vertex `(i₁, i₂)` is
/// index `i₁·k_b + i₂`.
pub fn tensor_product(a: &SamplePattern, b: &SamplePattern) -> Result<SamplePattern, PatternError> {
    for (name, p) in [("left", a), ("right", b)] {
        if !p.is_square_symmetric() {
            return Err(PatternError::Domain(format!(
                "{name} factor must be square and symmetric, got {:?}",
                p.shape()
            )));
        }
    }
    let kb = b.rows();
    let n = a.rows() * kb;
    let pairs = a
        .iter()
        .flat_map(|(i1, j1)| b.iter().map(move |(i2, j2)| (i1 * kb + i2, j1 * kb + j2)));
    SamplePattern::from_pairs(n, n, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_examples() {
        assert_eq!(circulant_band(5, 5).unwrap(), SamplePattern::full(5, 5));
        let p = circulant_band(9, 3).unwrap();
        assert_eq!(p.row(0), &[0, 1, 8]);
        assert!(p.is_square_symmetric());
        assert!(p.row_counts().iter().all(|&c| c == 3));
        assert!(circulant_band(9, 4).is_err());
        assert!(circulant_band(3, 5).is_err());
    }

    #[test]
    fn regular_contract() {
        for seed in 0..20 {
            let p = random_regular(50, 3, RngSeed(seed)).unwrap();
            assert!(p.is_square_symmetric());
            assert!(p.row_counts().iter().all(|&c| c == 3));
            assert!((0..50).all(|i| !p.contains(i, i)));
        }
    }

    #[test]
    fn complete_graph_is_unique() {
        let p = random_regular(7, 6, RngSeed(1)).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(p.contains(i, j), i != j);
            }
        }
    }

    #[test]
    fn regular_infeasible() {
        assert!(matches!(random_regular(5, 3, RngSeed(0)), Err(PatternError::Domain(_))));
        assert!(random_regular(5, 5, RngSeed(0)).is_err());
        assert_eq!(random_regular(6, 0, RngSeed(0)).unwrap().len(), 0);
    }

    #[test]
    fn dense_regular_graphs_finish() {
        for seed in 0..10 {
            let p = random_regular(24, 12, RngSeed(seed)).unwrap();
            assert!(p.row_counts().iter().all(|&c| c == 12));
        }
    }

    #[test]
    fn tensor_counts() {
        let a = circulant_band(5, 3).unwrap();
        let b = random_regular(6, 2, RngSeed(4)).unwrap();
        let t = tensor_product(&a, &b).unwrap();
        assert_eq!(t.len(), a.len() * b.len());
        assert!(t.is_square_symmetric());
        assert!(t.row_counts().iter().all(|&c| c == 6));
        let id = tensor_product(&a, &SamplePattern::full(1, 1)).unwrap();
        assert_eq!(id, a);
        assert!(tensor_product(&a, &SamplePattern::full(2, 3)).is_err());
    }

    #[test]
    fn spec_builds() {
        let spec = GraphSpec::tensor(
            GraphSpec::circulant(6, 3),
            GraphSpec::random_regular(6, 3, RngSeed(2)),
        );
        let p = spec.build().unwrap();
        assert_eq!(p.shape(), (36, 36));
        assert_eq!(spec.rho, 9);
        assert!(p.row_counts().iter().all(|&c| c == 9));
    }
}
