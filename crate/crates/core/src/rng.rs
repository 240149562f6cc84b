//! Seeded random streams. Every consumer of randomness draws from a named
//! substream of one seed so that runs are reproducible bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Disorder,
    Jitter,
    RandomProjector,
    Sampling,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Disorder => 1,
            Stream::Jitter => 2,
            Stream::RandomProjector => 3,
            Stream::Sampling => 4,
        }
    }
}

pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
