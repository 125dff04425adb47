//! Statistical checks of the analytic transforms against simulation.

use rand_distr::{Distribution, Poisson};
use std::f64::consts::PI;
use std::fmt;
use twotier::bounds::{laplace_nmbm_bounds, laplace_nmns_exact, laplace_nmns_ub, pdf_du_bounds};
use twotier::math::gauss_legendre;
use twotier::montecarlo::{
    empirical_distance_pdf, empirical_laplace, sample_nmbm_counts, sample_nmns_counts,
    uncovered_radii, DistanceHistogram,
};
use twotier::rng::{derive_stream, StreamLabel};
use twotier::NetworkParams;

pub const SUITES: [&str; 4] = ["lemma1", "lemma2", "appendixB", "oracle"];

pub const LAPLACE_S: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

/// Below this effective sample size a mean of `e^{-sX}` is dominated by a
/// handful of draws and its standard error is not trustworthy.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` for informational lines.
    pub pass: Option<bool>,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass != Some(false))
}

pub fn run_suite(
    name: &str,
    params: &NetworkParams,
    samples: u64,
    seed: u64,
) -> Result<Vec<Check>, String> {
    match name {
        "lemma1" => lemma1(params, samples, seed),
        "lemma2" => lemma2(params, samples, seed),
        "appendixB" => appendix_b(params, samples, seed),
        "oracle" => oracle(params, samples, seed),
        _ => {
            return Err(format!(
                "unknown suite {name:?}, expected one of {}",
                SUITES.join(", ")
            ))
        }
    }
    .map_err(|e| e.to_string())
}

fn effective_samples(xs: &[u64], s: f64) -> f64 {
    let (a, b) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let w = (-s * x as f64).exp();
        (a + w, b + w * w)
    });
    if b > 0.0 {
        a * a / b
    } else {
        0.0
    }
}

/// Empirical transform of the not-served count of a FAP at several
/// distances against its upper bound.
pub fn lemma1(params: &NetworkParams, samples: u64, seed: u64) -> twotier::Result<Vec<Check>> {
    let mut out = Vec::new();
    for d in [200.0, 500.0, 800.0] {
        let xs = sample_nmns_counts(
            params,
            d,
            samples,
            &derive_stream(seed, &StreamLabel::root("lemma1").with("d", d as u64)),
        )?;
        for s in LAPLACE_S {
            let (m, se) = empirical_laplace(&xs, s)?;
            let ub = laplace_nmns_ub(s, d, params)?;
            let exact = laplace_nmns_exact(s, d, params)?;
            out.push(Check {
                name: format!("lemma1 d={d} s={s}"),
                pass: Some(m - 3.0 * se <= ub),
                detail: format!("empirical {m:.6} ± {se:.2e}, upper {ub:.6}, exact {exact:.6}"),
            });
        }
    }
    Ok(out)
}

/// A deployment with few MUs, where `e^{-sX}` can be averaged reliably at
/// every `s` in [`LAPLACE_S`].
pub fn sparse_profile() -> NetworkParams {
    NetworkParams {
        mu_m: 2e-6,
        kappa: 0.3,
        ..Default::default()
    }
}

/// Empirical transform of the MBS-served count against its bracket, at
/// `params` and at [`sparse_profile`].
pub fn lemma2(params: &NetworkParams, samples: u64, seed: u64) -> twotier::Result<Vec<Check>> {
    let mut out = Vec::new();
    for (tag, p) in [("given", params.clone()), ("sparse", sparse_profile())] {
        let xs = sample_nmbm_counts(
            &p,
            samples,
            &derive_stream(seed, &StreamLabel::root("lemma2").with(tag, 0)),
        )?;
        for s in LAPLACE_S {
            let (m, se) = empirical_laplace(&xs, s)?;
            let (lb, ub) = laplace_nmbm_bounds(s, &p)?;
            let ess = effective_samples(&xs, s);
            let ok = lb - 3.0 * se <= m && m <= ub + 3.0 * se;
            out.push(Check {
                name: format!("lemma2 {tag} s={s}"),
                pass: (ess >= MIN_EFFECTIVE_SAMPLES).then_some(ok),
                detail: format!("lower {lb:.4e} empirical {m:.4e} ± {se:.2e} upper {ub:.4e}, effective samples {ess:.0}"),
            });
        }
    }
    Ok(out)
}

fn bin_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| 0.5 * wi * f(0.5 * (b - a) * xi + 0.5 * (a + b)))
        .sum()
}

/// Histogram of the distance of uncovered users against the density
/// bounds, plus closeness to the uniform-disk law at small `kappa`.
pub fn appendix_b(params: &NetworkParams, samples: u64, seed: u64) -> twotier::Result<Vec<Check>> {
    let mut out = Vec::new();
    let h = empirical_distance_pdf(
        params,
        20,
        samples,
        &derive_stream(seed, &StreamLabel::root("appendixB")),
    )?;
    for i in 0..h.density.len() {
        let (a, b) = (h.edges[i], h.edges[i + 1]);
        let lo = bin_average(|x| pdf_du_bounds(x, params).map_or(f64::NAN, |v| v.0), a, b);
        let hi = bin_average(|x| pdf_du_bounds(x, params).map_or(f64::NAN, |v| v.1), a, b);
        let (dens, se) = (h.density[i], h.std_err[i]);
        out.push(Check {
            name: format!("appendixB bin {i}"),
            pass: Some(lo - 3.0 * se <= dens && dens <= hi + 3.0 * se),
            detail: format!(
                "[{a}, {b}) density {dens:.4e} ± {se:.1e}, bounds [{lo:.4e}, {hi:.4e}]"
            ),
        });
    }
    let small = NetworkParams {
        kappa: 0.02,
        kappa_o: params.kappa_o.min(0.02),
        ..params.clone()
    };
    let (radii, _) = uncovered_radii(
        &small,
        samples,
        &derive_stream(seed, &StreamLabel::root("appendixB-ks")),
    )?;
    let ks = DistanceHistogram::ks_uniform_disk(&radii, small.radius);
    out.push(Check {
        name: "appendixB KS kappa=0.02".into(),
        pass: Some(ks < 0.02),
        detail: format!("distance {ks:.4} over {} samples", radii.len()),
    });
    Ok(out)
}

fn poisson_pmf(m: f64, kmax: usize) -> Vec<f64> {
    let mut p = vec![(-m).exp()];
    for k in 1..=kmax {
        let prev = p[k - 1];
        p.push(prev * m / k as f64);
    }
    p
}

/// `E[exp(-s (N1 - (n_c - N2)^+)^+)]` by a direct double sum.
pub fn nmns_double_sum(s: f64, m1: f64, m2: f64, n_c: u64) -> f64 {
    let kmax = 80;
    let (p1, p2) = (poisson_pmf(m1, kmax), poisson_pmf(m2, kmax));
    let mut acc = 0.0;
    for (j, q) in p2.iter().enumerate() {
        let room = (n_c as i64 - j as i64).max(0);
        for (k, p) in p1.iter().enumerate() {
            let y = (k as i64 - room).max(0) as f64;
            acc += p * q * if y == 0.0 { 1.0 } else { (-s * y).exp() };
        }
    }
    acc
}

fn apollonius(k: f64) -> f64 {
    k / (1.0 - k * k)
}

/// Exact transform of the not-served count against the double sum and a
/// direct simulation of the two Poisson counts.
pub fn oracle(params: &NetworkParams, samples: u64, seed: u64) -> twotier::Result<Vec<Check>> {
    let mut out = Vec::new();
    let m2 = params.mu_f * PI * ((params.r_f + params.ring_width).powi(2) - params.r_f.powi(2));
    for (i, d) in [200.0, 500.0, 800.0].into_iter().enumerate() {
        let m1 = params.mu_m
            * PI
            * d
            * d
            * (apollonius(params.kappa).powi(2) - apollonius(params.kappa_o).powi(2));
        let mut rng = derive_stream(seed, &StreamLabel::root("oracle").with("d", i as u64)).rng();
        let (n1, n2) = (Poisson::new(m1).ok(), Poisson::new(m2).ok());
        let ys: Vec<u64> = (0..samples)
            .map(|_| {
                let a = n1.map_or(0, |p| p.sample(&mut rng) as u64);
                let b = n2.map_or(0, |p| p.sample(&mut rng) as u64);
                a.saturating_sub(params.n_c.saturating_sub(b))
            })
            .collect();
        for s in [0.3, 1.0, 3.0] {
            let exact = laplace_nmns_exact(s, d, params)?;
            let sum = nmns_double_sum(s, m1, m2, params.n_c);
            let (m, se) = empirical_laplace(&ys, s)?;
            out.push(Check {
                name: format!("oracle d={d} s={s}"),
                pass: Some((exact - sum).abs() < 1e-10 && (exact - m).abs() <= 3.0 * se),
                detail: format!(
                    "exact {exact:.12} double sum {sum:.12} simulated {m:.6} ± {se:.1e}"
                ),
            });
        }
    }
    Ok(out)
}

/// Weighted least-squares nonincreasing fit by pool-adjacent-violators.
pub fn antitonic_fit(y: &[f64], w: &[f64]) -> Vec<f64> {
    // blocks of (weighted mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push((yi, wi, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m1, w1, l1) = blocks[n - 2];
            let (m2, w2, l2) = blocks[n - 1];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(n - 2);
            blocks.push(((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}

/// Weighted squared distance from the estimates to the closest
/// nonincreasing sequence. Under a nonincreasing truth it is stochastically
/// below a chi-square with `len - 1` degrees of freedom.
pub fn decreasing_trend_statistic(est: &[(f64, f64)]) -> f64 {
    let floor = est
        .iter()
        .map(|e| e.1)
        .filter(|&se| se > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    let y: Vec<f64> = est.iter().map(|e| e.0).collect();
    let w: Vec<f64> = est.iter().map(|e| 1.0 / e.1.max(floor).powi(2)).collect();
    let fit = antitonic_fit(&y, &w);
    y.iter()
        .zip(&fit)
        .zip(&w)
        .map(|((a, b), wi)| wi * (a - b).powi(2))
        .sum()
}
