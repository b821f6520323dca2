use sha2::{Digest, Sha256};

/// `base ^ h`, where `h` is the first 8 bytes (little endian) of
/// SHA-256 over `"problem/dim"`, the config index and the repetition index.
/// Independent of execution order.
pub fn derive_seed(base: u64, problem: &str, dims: usize, config: usize, rep: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(format!("{problem}/{dims}").as_bytes());
    h.update([0u8]);
    h.update((config as u64).to_le_bytes());
    h.update((rep as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    base ^ u64::from_le_bytes(bytes)
}
