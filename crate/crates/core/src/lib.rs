//! Uplink outage analysis for a two-tier macro/femto network where each
//! femtocell access point (FAP) has a limited backhaul.
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod access;
pub mod bounds;
pub mod channel;
pub mod deployment;
pub mod error;
pub mod geometry;
pub mod math;
pub mod montecarlo;
pub mod params;
pub mod rng;

pub use error::{Error, Result};
pub use params::NetworkParams;
