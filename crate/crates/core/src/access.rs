//! Open access with a per-FAP backhaul limit.
//!
//! An MU is a candidate of the closest FAP among those with
//! `d(u, a) <= kappa * d(u, mbs)`. Each FAP first carries all of its FUs and
//! then admits a uniformly random subset of its candidates, up to
//! `(n_c - N_f)^+`. Everyone else goes to the MBS.

use crate::deployment::Realization;
use crate::error::{Error, Result};
use crate::params::NetworkParams;
use crate::rng::{Lane, RngStream};
use rand::seq::SliceRandom;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Server {
    Mbs,
    Fap(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub serving: Vec<Server>,
    /// Closest qualifying FAP of each MU, if any.
    pub candidate: Vec<Option<usize>>,
    /// MUs admitted by each FAP, in selection order.
    pub served_by_fap: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn mbs_served(&self) -> impl Iterator<Item = usize> + '_ {
        self.serving
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Server::Mbs)
            .map(|(i, _)| i)
    }

    pub fn mbs_count(&self) -> usize {
        self.serving.iter().filter(|s| **s == Server::Mbs).count()
    }
}

/// Closest FAP satisfying the access rule for the MU at index `u`.
fn nearest_qualifying(realization: &Realization, u: usize, kappa: f64) -> Option<usize> {
    let p = realization.mus[u];
    let lim = kappa * kappa * p.norm_sq();
    let mut best: Option<(usize, f64)> = None;
    for (i, &a) in realization.faps.iter().enumerate() {
        let d2 = p.dist_sq(a);
        if d2 <= lim && best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, _)| i)
}

pub fn assign(realization: &Realization, params: &NetworkParams, stream: &RngStream) -> Assignment {
    let n_mu = realization.mus.len();
    let n_fap = realization.faps.len();
    let candidate: Vec<Option<usize>> = if params.kappa == 0.0 {
        vec![None; n_mu]
    } else {
        (0..n_mu)
            .map(|u| nearest_qualifying(realization, u, params.kappa))
            .collect()
    };
    let mut pools = vec![Vec::new(); n_fap];
    for (u, c) in candidate.iter().enumerate() {
        if let Some(a) = c {
            pools[*a].push(u);
        }
    }
    let mut serving = vec![Server::Mbs; n_mu];
    let mut rng = stream.lane(Lane::Selection).rng();
    // Every pool is shuffled in full so the draws consumed never depend on
    // n_c: raising n_c only extends each admitted prefix.
    for (a, pool) in pools.iter_mut().enumerate() {
        pool.shuffle(&mut rng);
        let cap = params.n_c.saturating_sub(realization.fus[a].len() as u64);
        let take = (cap.min(pool.len() as u64)) as usize;
        pool.truncate(take);
        for &u in pool.iter() {
            serving[u] = Server::Fap(a);
        }
    }
    Assignment {
        serving,
        candidate,
        served_by_fap: pools,
    }
}

/// The MU classes seen from one tagged FAP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UserClasses {
    /// Served by the tagged FAP.
    pub served: Vec<usize>,
    /// Candidates of the tagged FAP left to the MBS.
    pub not_served: Vec<usize>,
    /// Candidates of another FAP left to the MBS.
    pub inside_other: Vec<usize>,
    /// Covered by no FAP.
    pub outside: Vec<usize>,
    /// Served by some other FAP.
    pub other_fap_served: Vec<usize>,
}

impl UserClasses {
    pub fn total(&self) -> usize {
        self.served.len()
            + self.not_served.len()
            + self.inside_other.len()
            + self.outside.len()
            + self.other_fap_served.len()
    }
}

pub fn classify(
    realization: &Realization,
    assignment: &Assignment,
    tagged: Option<usize>,
) -> Result<UserClasses> {
    let tag = tagged
        .or(realization.tagged_fap)
        .filter(|&t| t < realization.faps.len())
        .ok_or_else(|| Error::Precondition("classify needs a tagged FAP".into()))?;
    let mut c = UserClasses::default();
    for (u, (&s, &cand)) in assignment
        .serving
        .iter()
        .zip(&assignment.candidate)
        .enumerate()
    {
        match (s, cand) {
            (Server::Fap(a), _) if a == tag => c.served.push(u),
            (Server::Fap(_), _) => c.other_fap_served.push(u),
            (Server::Mbs, Some(a)) if a == tag => c.not_served.push(u),
            (Server::Mbs, Some(_)) => c.inside_other.push(u),
            (Server::Mbs, None) => c.outside.push(u),
        }
    }
    Ok(c)
}
