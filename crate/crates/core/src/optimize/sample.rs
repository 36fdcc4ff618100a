use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frame::Frame;

pub const DEFAULT_SAMPLE_CAP: usize = 30_000;
pub const DEFAULT_SEED: u64 = 0x5eed_1ab5;

/// Sorted row positions sampled uniformly without replacement from one
/// frame version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCache {
    pub version: u64,
    pub cap: usize,
    pub seed: u64,
    pub rows: Arc<[usize]>,
}

impl SampleCache {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// All rows when the frame fits under `cap`, otherwise `cap` distinct rows
/// drawn with an RNG seeded by `(seed, version)`.
pub fn make_sample(frame: &Frame, cap: usize, seed: u64) -> SampleCache {
    let n = frame.row_count();
    let cap = cap.max(1);
    let rows: Vec<usize> = if n <= cap {
        (0..n).collect()
    } else {
        let mixed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ frame.version();
        let mut rng = ChaCha8Rng::seed_from_u64(mixed);
        let mut rows = rand::seq::index::sample(&mut rng, n, cap).into_vec();
        rows.sort_unstable();
        rows
    };
    SampleCache { version: frame.version(), cap, seed, rows: rows.into() }
}
