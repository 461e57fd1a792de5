//! Stable hashing for child seeds and stage fingerprints.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Child seed for one unit of work: the first eight bytes (little endian)
/// of SHA-256 over the master seed, the stage name, the instance index and
/// the repeat index. Independent of thread scheduling and platform.
pub fn derive_seed(master: u64, stage: &str, instance: u64, repeat: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(stage.as_bytes());
    h.update([0u8]);
    h.update(instance.to_le_bytes());
    h.update(repeat.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fingerprint of any serializable value through its JSON encoding.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration values serialize");
    sha256_hex(&json)
}
