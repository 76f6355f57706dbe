use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initial = 1,
    Dynamics = 2,
    Auxiliary = 3,
}

/// ChaCha8 stream keyed by `(master seed, replica, purpose, scale N)`.
///
/// The four words form the 256-bit key, so every combination gets an
/// independent stream and results never depend on thread scheduling.
pub fn stream_rng(master: u64, replica: u64, purpose: Purpose, scale: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, w) in [master, replica, purpose as u64, scale].iter().enumerate() {
        key[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
