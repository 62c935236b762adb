//! Per-cell seed derivation.
//!
//! Every random draw in an experiment takes its seed from
//! `SHA-256(master_seed ‖ experiment ‖ 0 ‖ label ‖ 0 ‖ indices…)`, keeping the
//! first 8 bytes little-endian. Integers are encoded as 8 little-endian bytes.
//! No state is carried between cells, so cells can run in any order.

use sha2::{Digest, Sha256};
use wmc_core::linalg::RngSeed;

pub fn derive_seed(master: u64, experiment: &str, label: &str, indices: &[u64]) -> RngSeed {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(experiment.as_bytes());
    h.update([0u8]);
    h.update(label.as_bytes());
    h.update([0u8]);
    for i in indices {
        h.update(i.to_le_bytes());
    }
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    RngSeed(u64::from_le_bytes(first))
}
