//! Per-task fan-out and deterministic random streams.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Maps a job over task indices, returning results in index order.
///
/// Implementations may run jobs concurrently; every job owns its graph and
/// random stream, so the result never depends on scheduling.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(job).collect()
    }
}

/// Purpose tags that separate the random streams of one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Tasks = 2,
    PreRollout = 3,
    PostRollout = 4,
    Eval = 5,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for `(seed, iteration, task, stream)`.
pub fn stream_rng(seed: u64, iteration: u64, task: u64, stream: Stream) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    h = splitmix(h ^ iteration);
    h = splitmix(h ^ task.wrapping_mul(0x2545_F491_4F6C_DD1D));
    h = splitmix(h ^ stream as u64);
    ChaCha8Rng::seed_from_u64(h)
}
