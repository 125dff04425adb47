//! Monte Carlo outage estimators and empirical checks of the analytic
//! transforms.
//!
//! Trials are numbered; trial `i` draws only from `stream.trial(i)`, and
//! batches are reduced in index order, so every result depends on the seed
//! alone and not on how many worker threads run the batches.

use crate::access::Assignment;
use crate::access::{assign, classify};
use crate::bounds::Gamma4Kernel;
use crate::channel::{
    interference_from_weights, mu_fap_weights, mu_mbs_weights, sample_fading, signal_power, sir,
    ChannelModel, Hopping, Powers,
};
use crate::deployment::{
    complete_realization, sample_ppp_disk, sample_realization, sample_tagged_cell, Realization,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{coverage_disk, Point};
use crate::params::NetworkParams;
use crate::rng::{Lane, RngStream};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Trial indices handed to the worker pool at once.
const BATCH: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub trials_total: u64,
    pub trials_conditioned: u64,
}

impl OutageEstimate {
    fn from_counts(hits: u64, conditioned: u64, total: u64) -> Result<Self> {
        if conditioned == 0 {
            return Err(Error::InsufficientConditioning {
                trials_total: total,
            });
        }
        let p = hits as f64 / conditioned as f64;
        Ok(Self {
            p_hat: p,
            std_err: (p * (1.0 - p) / conditioned as f64).sqrt(),
            trials_total: total,
            trials_conditioned: conditioned,
        })
    }
}

/// How many trials to run: stop after `conditioned` trials pass the
/// conditioning event, or after `max_total` trials in all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialBudget {
    pub conditioned: u64,
    pub max_total: u64,
}

impl TrialBudget {
    pub fn new(conditioned: u64) -> Self {
        Self {
            conditioned,
            max_total: conditioned.saturating_mul(10_000),
        }
    }

    pub fn with_max_total(self, max_total: u64) -> Self {
        Self { max_total, ..self }
    }
}

/// Distance of the tagged FAP from the MBS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TagDistance {
    Fixed(f64),
    /// Redrawn every trial from the uniform-disk law `2r/R^2`.
    Uniform,
}

/// SIR of the tagged user in every conditioned trial, in trial order.
#[derive(Clone, Debug, PartialEq)]
pub struct SirSamples {
    pub sirs: Vec<f64>,
    pub trials_total: u64,
}

impl SirSamples {
    pub fn outage(&self, theta: f64) -> Result<OutageEstimate> {
        let hits = self.sirs.iter().filter(|&&s| s < theta).count() as u64;
        OutageEstimate::from_counts(hits, self.sirs.len() as u64, self.trials_total)
    }
}

/// Runs `trial` on indices `0, 1, ...` and keeps the first
/// `budget.conditioned` non-`None` results.
pub fn run_conditioned<T, F>(budget: TrialBudget, trial: F) -> (Vec<T>, u64)
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync,
{
    let mut kept = Vec::new();
    let mut next = 0u64;
    while (kept.len() as u64) < budget.conditioned && next < budget.max_total {
        let end = (next + BATCH).min(budget.max_total);
        let batch: Vec<Option<T>> = (next..end).into_par_iter().map(&trial).collect();
        for (offset, r) in batch.into_iter().enumerate() {
            if let Some(v) = r {
                kept.push(v);
                if kept.len() as u64 == budget.conditioned {
                    return (kept, next + offset as u64 + 1);
                }
            }
        }
        next = end;
    }
    (kept, next)
}

fn tag_distance(tag: TagDistance, params: &NetworkParams, stream: &RngStream) -> f64 {
    match tag {
        TagDistance::Fixed(d) => d,
        TagDistance::Uniform => {
            params.radius * stream.lane(Lane::Main).rng().random::<f64>().sqrt()
        }
    }
}

fn draw_sir(
    weights: &[f64],
    power: f64,
    params: &NetworkParams,
    hopping: Hopping,
    stream: &RngStream,
) -> f64 {
    let mut rng = stream.lane(Lane::Fading).rng();
    let h0 = sample_fading(params.sigma2, &mut rng);
    let i = interference_from_weights(weights, params, hopping, &mut rng);
    sir(signal_power(power, h0, params), i).sir
}

fn pick<T: Copy>(items: &[T], stream: &RngStream) -> T {
    items[stream.lane(Lane::Pick).rng().random_range(0..items.len())]
}

/// One trial for an MU served by the tagged FAP; `None` when the tagged
/// FAP serves nobody.
fn mu_fap_trial(
    params: &NetworkParams,
    model: ChannelModel,
    tag: TagDistance,
    st: &RngStream,
) -> Option<f64> {
    let d = tag_distance(tag, params, st);
    let cell = sample_tagged_cell(params, d, st).ok()?;
    if !cell.may_serve(params.n_c) {
        return None;
    }
    let r = complete_realization(params, Some(cell), st);
    let a = assign(&r, params, st);
    if a.served_by_fap[0].is_empty() {
        return None;
    }
    let u = pick(&a.served_by_fap[0], st);
    let w = mu_fap_weights(
        &r,
        &a,
        u,
        Powers::from_params(params),
        params.alpha,
        model.interference,
    )
    .ok()?;
    Some(draw_sir(&w, params.p_f(), params, model.hopping, st))
}

fn mu_mbs_trial(params: &NetworkParams, model: ChannelModel, st: &RngStream) -> Option<f64> {
    let r = sample_realization(params, None, st).ok()?;
    let a = assign(&r, params, st);
    let served: Vec<usize> = a.mbs_served().collect();
    if served.is_empty() {
        return None;
    }
    let u = pick(&served, st);
    let w = mu_mbs_weights(
        &r,
        &a,
        u,
        Powers::from_params(params),
        params.alpha,
        model.interference,
    )
    .ok()?;
    Some(draw_sir(&w, params.p_m(), params, model.hopping, st))
}

fn check_fixed_tag(tag: TagDistance, params: &NetworkParams) -> Result<()> {
    if let TagDistance::Fixed(d) = tag {
        if !(d > 0.0 && d < params.radius) {
            return domain("estimate_outage_mu_fap", format!("need 0 < d < R, got {d}"));
        }
    }
    Ok(())
}

/// SIRs of an MU served by the tagged FAP, conditioned on the FAP serving
/// at least one MU.
pub fn simulate_mu_fap(
    params: &NetworkParams,
    tag: TagDistance,
    model: ChannelModel,
    budget: TrialBudget,
    stream: &RngStream,
) -> Result<SirSamples> {
    params.validate()?;
    check_fixed_tag(tag, params)?;
    let (sirs, total) = run_conditioned(budget, |i| {
        mu_fap_trial(params, model, tag, &stream.trial(i))
    });
    Ok(SirSamples {
        sirs,
        trials_total: total,
    })
}

/// SIRs of an MU served by the MBS, conditioned on the MBS serving at least
/// one MU.
pub fn simulate_mu_mbs(
    params: &NetworkParams,
    model: ChannelModel,
    budget: TrialBudget,
    stream: &RngStream,
) -> Result<SirSamples> {
    params.validate()?;
    let (sirs, total) = run_conditioned(budget, |i| mu_mbs_trial(params, model, &stream.trial(i)));
    Ok(SirSamples {
        sirs,
        trials_total: total,
    })
}

/// Outage at `params.theta` for an MU served by a FAP at distance `d`.
pub fn estimate_outage_mu_fap(
    params: &NetworkParams,
    d: f64,
    trials: u64,
    model: ChannelModel,
    stream: &RngStream,
) -> Result<OutageEstimate> {
    simulate_mu_fap(
        params,
        TagDistance::Fixed(d),
        model,
        TrialBudget::new(trials),
        stream,
    )?
    .outage(params.theta)
}

/// Outage at `params.theta` for an MU served by the MBS.
pub fn estimate_outage_mu_mbs(
    params: &NetworkParams,
    trials: u64,
    model: ChannelModel,
    stream: &RngStream,
) -> Result<OutageEstimate> {
    simulate_mu_mbs(params, model, TrialBudget::new(trials), stream)?.outage(params.theta)
}

/// Outage of MU `tagged_mu` in a fixed deployment, redrawing only fading.
pub fn estimate_outage_fixed(
    realization: &Realization,
    assignment: &Assignment,
    tagged_mu: usize,
    params: &NetworkParams,
    model: ChannelModel,
    trials: u64,
    stream: &RngStream,
) -> Result<OutageEstimate> {
    let pw = Powers::from_params(params);
    let (w, power) = match assignment.serving.get(tagged_mu) {
        Some(crate::access::Server::Fap(_)) => (
            mu_fap_weights(
                realization,
                assignment,
                tagged_mu,
                pw,
                params.alpha,
                model.interference,
            )?,
            pw.p_f,
        ),
        _ => (
            mu_mbs_weights(
                realization,
                assignment,
                tagged_mu,
                pw,
                params.alpha,
                model.interference,
            )?,
            pw.p_m,
        ),
    };
    let (sirs, total) = run_conditioned(TrialBudget::new(trials), |i| {
        Some(draw_sir(&w, power, params, model.hopping, &stream.trial(i)))
    });
    let hits = sirs.iter().filter(|&&s| s < params.theta).count() as u64;
    OutageEstimate::from_counts(hits, sirs.len() as u64, total)
}

/// Simulated `|U_ns|` of a FAP at distance `d`, one per realization.
pub fn sample_nmns_counts(
    params: &NetworkParams,
    d: f64,
    n: u64,
    stream: &RngStream,
) -> Result<Vec<u64>> {
    params.validate()?;
    check_fixed_tag(TagDistance::Fixed(d), params)?;
    let (v, _) = run_conditioned(TrialBudget::new(n).with_max_total(n), |i| {
        let st = stream.trial(i);
        let r = sample_realization(params, Some(d), &st).ok()?;
        let a = assign(&r, params, &st);
        Some(classify(&r, &a, None).ok()?.not_served.len() as u64)
    });
    Ok(v)
}

/// Simulated number of MBS-served MUs, one per realization.
pub fn sample_nmbm_counts(params: &NetworkParams, n: u64, stream: &RngStream) -> Result<Vec<u64>> {
    params.validate()?;
    let (v, _) = run_conditioned(TrialBudget::new(n).with_max_total(n), |i| {
        let st = stream.trial(i);
        let r = sample_realization(params, None, &st).ok()?;
        Some(assign(&r, params, &st).mbs_count() as u64)
    });
    Ok(v)
}

/// Sample mean and standard error.
fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
    for x in values {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    if n < 2 {
        return (mean, 0.0);
    }
    (mean, (m2 / (n - 1) as f64 / n as f64).sqrt())
}

/// `(mean, std_err)` of `e^{-s X}` over the samples.
pub fn empirical_laplace(samples: &[u64], s: f64) -> Result<(f64, f64)> {
    if s.is_nan() || s < 0.0 {
        return domain(
            "empirical_laplace",
            format!("s must be non-negative, got {s}"),
        );
    }
    Ok(mean_se(samples.iter().map(|&x| (-s * x as f64).exp())))
}

/// `(mean, std_err)` of the `gamma_4` integrand over other-FAP positions
/// drawn uniformly on the macro disk.
pub fn estimate_gamma4(
    params: &NetworkParams,
    d: f64,
    theta: f64,
    samples: u64,
    stream: &RngStream,
) -> Result<(f64, f64)> {
    let kernel = Gamma4Kernel::new(theta, d, params)?;
    let (v, _) = run_conditioned(TrialBudget::new(samples).with_max_total(samples), |i| {
        let mut rng = stream.trial(i).rng();
        let p = Point::polar(
            params.radius * rng.random::<f64>().sqrt(),
            TAU * rng.random::<f64>(),
        );
        Some(kernel.eval(p))
    });
    Ok(mean_se(v.into_iter()))
}

/// Histogram of the distance to the MBS of uniform points covered by no
/// FAP, normalized as a density.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Standard error of each density value.
    pub std_err: Vec<f64>,
    pub accepted: u64,
    pub trials_total: u64,
}

impl DistanceHistogram {
    /// Kolmogorov-Smirnov distance between the accepted samples and the
    /// uniform-disk law, from per-sample radii.
    pub fn ks_uniform_disk(radii: &[f64], radius: f64) -> f64 {
        let mut r: Vec<f64> = radii.to_vec();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = r.len() as f64;
        r.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = (x / radius).powi(2);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Radii of `samples` uniform points that no FAP covers, each against a
/// fresh FAP process.
pub fn uncovered_radii(
    params: &NetworkParams,
    samples: u64,
    stream: &RngStream,
) -> Result<(Vec<f64>, u64)> {
    if params.kappa > 0.5 {
        return domain("empirical_distance_pdf", "needs kappa <= 0.5");
    }
    params.validate()?;
    let budget = TrialBudget::new(samples);
    Ok(run_conditioned(budget, |i| {
        let st = stream.trial(i);
        let mut rng = st.lane(Lane::Probe).rng();
        let u = Point::polar(
            params.radius * rng.random::<f64>().sqrt(),
            TAU * rng.random::<f64>(),
        );
        let faps = sample_ppp_disk(
            params.lambda_f,
            params.radius,
            &mut st.lane(Lane::Faps).rng(),
        );
        let covered = faps.iter().any(|&a| {
            coverage_disk(a, params.kappa)
                .map(|c| c.contains(u))
                .unwrap_or(false)
        });
        (!covered).then(|| u.norm())
    }))
}

pub fn empirical_distance_pdf(
    params: &NetworkParams,
    bins: usize,
    samples: u64,
    stream: &RngStream,
) -> Result<DistanceHistogram> {
    if bins == 0 {
        return domain("empirical_distance_pdf", "need at least one bin");
    }
    let (radii, total) = uncovered_radii(params, samples, stream)?;
    let n = radii.len();
    if n == 0 {
        return Err(Error::InsufficientConditioning {
            trials_total: total,
        });
    }
    let width = params.radius / bins as f64;
    let mut counts = vec![0u64; bins];
    for r in &radii {
        counts[((r / width) as usize).min(bins - 1)] += 1;
    }
    let nf = n as f64;
    let density = counts.iter().map(|&c| c as f64 / nf / width).collect();
    let std_err = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            (p * (1.0 - p) / nf).sqrt() / width
        })
        .collect();
    Ok(DistanceHistogram {
        edges: (0..=bins).map(|i| i as f64 * width).collect(),
        density,
        std_err,
        accepted: n as u64,
        trials_total: total,
    })
}
