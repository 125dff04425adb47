//! Deterministic, splittable random streams.
//!
//! A stream is identified by a master seed and a label path. The label is
//! hashed into a ChaCha8 key; trial indices select the ChaCha stream (nonce)
//! and purposes ("lanes") select disjoint regions of the block counter, so
//! trial `i` always sees the same numbers no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator handed to samplers.
pub type SimRng = ChaCha8Rng;

/// Each lane owns `2^LANE_SHIFT` words of the 68-bit ChaCha word counter.
const LANE_SHIFT: u32 = 40;

/// Consumer identifier: an ordered path of `(name, index)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StreamLabel(Vec<(String, u64)>);

impl StreamLabel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(name: &str) -> Self {
        Self::new().with(name, 0)
    }

    pub fn with(mut self, name: &str, index: u64) -> Self {
        self.0.push((name.to_owned(), index));
        self
    }

    pub fn parts(&self) -> &[(String, u64)] {
        &self.0
    }
}

/// Sub-purposes within one trial. Each gets its own region of the stream so
/// changing how much one consumer draws never shifts another.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum Lane {
    Main = 0,
    Faps = 1,
    TagPosition = 2,
    TagFus = 3,
    InnerMus = 4,
    OuterMus = 5,
    Fus = 6,
    Selection = 7,
    Fading = 8,
    Pick = 9,
    Probe = 10,
}

/// A value-like handle on one deterministic random sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    key: [u8; 32],
    stream: u64,
    lane: u32,
}

/// Derives the stream for `(master_seed, label)`.
pub fn derive_stream(master_seed: u64, label: &StreamLabel) -> RngStream {
    RngStream::derive(master_seed, label)
}

impl RngStream {
    pub fn derive(master_seed: u64, label: &StreamLabel) -> Self {
        let mut h = Sha256::new();
        h.update(b"twotier-rng-v1");
        h.update(master_seed.to_le_bytes());
        for (name, index) in label.parts() {
            h.update((name.len() as u64).to_le_bytes());
            h.update(name.as_bytes());
            h.update(index.to_le_bytes());
        }
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Self {
            key,
            stream: 0,
            lane: 0,
        }
    }

    /// The stream dedicated to trial `index`.
    pub fn trial(&self, index: u64) -> Self {
        Self {
            key: self.key,
            stream: index,
            lane: 0,
        }
    }

    pub fn lane(&self, lane: Lane) -> Self {
        Self {
            key: self.key,
            stream: self.stream,
            lane: lane as u32,
        }
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(self.stream);
        rng.set_word_pos((self.lane as u128) << LANE_SHIFT);
        rng
    }
}
