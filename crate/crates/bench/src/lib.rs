//! Shared fixtures for the benchmarks.

use twotier::rng::{derive_stream, RngStream, StreamLabel};
use twotier::NetworkParams;

pub const BENCH_SEED: u64 = 7;

pub fn stream(name: &str) -> RngStream {
    derive_stream(BENCH_SEED, &StreamLabel::root(name))
}

/// Default deployment with backhaul limit `n_c`.
pub fn params_with_backhaul(n_c: u64) -> NetworkParams {
    NetworkParams {
        n_c,
        ..Default::default()
    }
}
