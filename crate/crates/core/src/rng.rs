//! Named random streams derived from one master seed.
//!
//! Each consumer gets its own ChaCha stream, so adding draws to one (say,
//! more shuffles) never shifts the values seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    Shuffle,
    Augment,
    Split,
    /// Random comparison subsets drawn for the pseudo-label audit.
    Subset,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Shuffle => 2,
            Stream::Augment => 3,
            Stream::Split => 4,
            Stream::Subset => 5,
        }
    }
}

pub fn stream(master: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(which.id());
    rng
}
