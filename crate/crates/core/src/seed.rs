//! Named, hierarchical RNG substreams derived from one master seed.
//!
//! Every stochastic feature draws from its own stream, keyed by a name and a
//! path of integers (episode, step, link, agent...). A stream depends only on
//! its key, so work items can be evaluated in any order or on any thread and
//! still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// A child tree whose streams are disjoint from the parent's.
    pub fn child(&self, name: &str, path: &[u64]) -> SeedTree {
        SeedTree::new(self.key(name, path))
    }

    pub fn rng(&self, name: &str, path: &[u64]) -> SimRng {
        SimRng::seed_from_u64(self.key(name, path))
    }

    fn key(&self, name: &str, path: &[u64]) -> u64 {
        let mut h = splitmix64(self.master ^ fnv1a(name));
        for &p in path {
            h = splitmix64(h ^ splitmix64(p));
        }
        h
    }
}

/// Serializable position of a ChaCha stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &SimRng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Option<SimRng> {
        let pos: u128 = self.word_pos.parse().ok()?;
        let mut rng = SimRng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Some(rng)
    }
}
