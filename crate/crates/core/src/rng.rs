//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha8 stream derived from
//! a single 64-bit seed. The stream id is the ChaCha nonce, so two streams from
//! the same seed never overlap, and the sampler's randomness is structurally
//! independent of the kernel's per-sample subsamples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const KERNEL_SUBSAMPLE_BASE: u64 = 1 << 32;

/// Named random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Gaussian increments of a Markov chain.
    Chain,
    /// Gradient subsamples drawn by the sampler at each step.
    ChainSubsample,
    /// Exact iid reference draws.
    Iid,
    /// Monte Carlo draws used to check closed-form expectations.
    MmdOracle,
    /// Synthetic dataset generation.
    Data,
    /// Memoized kernel subsample for sample index `i`.
    KernelSubsample(u64),
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Chain => 1,
            Stream::ChainSubsample => 2,
            Stream::Iid => 3,
            Stream::MmdOracle => 4,
            Stream::Data => 5,
            Stream::KernelSubsample(i) => KERNEL_SUBSAMPLE_BASE + i,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
