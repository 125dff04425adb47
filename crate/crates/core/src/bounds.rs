//! Closed-form outage bounds and the Laplace transforms behind them.

use crate::error::{domain, Error, Result};
use crate::geometry::{partition_probs, PartitionProbs, Point};
use crate::math::{
    expm1_over_x, gauss_legendre, one_minus_exp_neg_over_x, poisson_at_least, poisson_pmf_truncated,
};
use crate::params::NetworkParams;
use std::f64::consts::PI;

/// Tail mass dropped when truncating Poisson sums.
const POISSON_TAIL: f64 = 1e-13;

/// Largest exponent accepted before `exp` loses all precision.
const MAX_EXPONENT: f64 = 700.0;

/// A lower and an upper bound with the named quantities used to build them.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSet {
    pub lower: f64,
    pub upper: f64,
    pub intermediates: Vec<(&'static str, f64)>,
}

impl BoundSet {
    fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            intermediates: Vec::new(),
        }
    }

    fn with(mut self, name: &'static str, v: f64) -> Self {
        self.intermediates.push((name, v));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.intermediates
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

/// Which transform of `N_ns` goes into the lower bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhiMode {
    #[default]
    Exact,
    LemmaUpper,
}

fn check_s(op: &'static str, s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return domain(op, format!("s must be non-negative, got {s}"));
    }
    Ok(())
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `e^{-s}`, exact zero at `s = inf`.
fn exp_neg(s: f64) -> f64 {
    if s.is_infinite() {
        0.0
    } else {
        (-s).exp()
    }
}

/// Poisson probability generating function at `e^{-s}`.
fn poisson_laplace(mean: f64, s: f64) -> f64 {
    (mean * -(-exp_neg(s) + 1.0)).exp()
}

/// `E[e^{-sN}] - 1` for `N ~ Poisson(mean)`, without cancellation.
fn poisson_laplace_m1(mean: f64, s: f64) -> f64 {
    (mean * -(-exp_neg(s) + 1.0)).exp_m1()
}

/// `P(N >= n_c)` for the FU count of one FAP.
pub fn fu_overflow_prob(params: &NetworkParams) -> Result<f64> {
    poisson_at_least(params.n_c, params.nbar_fu())
}

/// Mean number of MUs inside the coverage disk but outside the exclusion
/// disk of a FAP at distance `d`.
pub fn nbar_mu_d(d: f64, params: &NetworkParams) -> Result<f64> {
    if params.kappa_o > params.kappa {
        return domain("nbar_mu_d", "kappa_o must not exceed kappa");
    }
    if !(0.0..1.0).contains(&params.kappa) {
        return domain("nbar_mu_d", "kappa must lie in [0, 1)");
    }
    if !(d >= 0.0) {
        return domain(
            "nbar_mu_d",
            format!("distance must be non-negative, got {d}"),
        );
    }
    Ok(PI * params.mu_m * coverage_gap(params) * d * d)
}

/// `(kappa/(1-kappa^2))^2 - (kappa_o/(1-kappa_o^2))^2`.
fn coverage_gap(params: &NetworkParams) -> f64 {
    let c = params.coverage_factor();
    let o = params.exclusion_factor();
    c * c - o * o
}

/// `E[e^{-s N_ns}]` with `N_ns = (N1 - (n_c - N2)^+)^+`. `s = inf` gives
/// `P(N_ns = 0)`.
pub fn laplace_nmns_exact(s: f64, d: f64, params: &NetworkParams) -> Result<f64> {
    check_s("laplace_Nmns_exact", s)?;
    let m1 = nbar_mu_d(d, params)?;
    let m2 = params.nbar_fu();
    let p1 = poisson_pmf_truncated(m1, POISSON_TAIL);
    let p2 = poisson_pmf_truncated(m2, POISSON_TAIL);
    let z = exp_neg(s);
    // 1 - E[e^{-s (N1 - c)^+}] = sum_{k > c} p1(k) (1 - z^{k-c})
    let loss = |c: usize| -> f64 {
        let mut loss = 0.0;
        let mut zk = 1.0;
        for &pk in p1.iter().skip(c + 1) {
            zk *= z;
            loss += pk * (1.0 - zk);
        }
        loss
    };
    let n_c = params.n_c;
    let mut total = 0.0;
    for (j, &pj) in p2.iter().enumerate() {
        if (j as u64) >= n_c {
            break;
        }
        total += pj * loss((n_c - j as u64) as usize);
    }
    total += poisson_at_least(n_c, m2)? * -poisson_laplace_m1(m1, s);
    Ok(1.0 - total)
}

/// Upper bound on `E[e^{-s N_ns}]` that drops the FU-light branch.
pub fn laplace_nmns_ub(s: f64, d: f64, params: &NetworkParams) -> Result<f64> {
    check_s("laplace_Nmns_ub", s)?;
    let m1 = nbar_mu_d(d, params)?;
    let p = fu_overflow_prob(params)?;
    Ok(1.0 - p + poisson_laplace(m1, s) * p)
}

/// `beta` for the MBS-count bound at `s`.
pub fn lemma2_beta(s: f64, params: &NetworkParams) -> Result<f64> {
    check_s("laplace_Nmbm_bounds", s)?;
    let p = fu_overflow_prob(params)?;
    let x = s.exp_m1() * coverage_gap(params) * params.nbar_mu();
    Ok(p + (1.0 - p) * expm1_over_x(x))
}

/// `(lb, ub)` on `E[e^{-s N_m^{b_m}}]`.
pub fn laplace_nmbm_bounds(s: f64, params: &NetworkParams) -> Result<(f64, f64)> {
    if params.kappa_o > params.kappa {
        return domain("laplace_Nmbm_bounds", "kappa_o must not exceed kappa");
    }
    let beta = lemma2_beta(s, params)?;
    let base = exp_neg(s).mul_add(params.nbar_mu(), -params.nbar_mu());
    Ok((base.exp(), (base + (beta - 1.0) * params.nbar_fap()).exp()))
}

/// `1 - 1/(1 + theta r / (n_h eta))`, exactly zero at `theta = 0`.
fn hop_loss(theta: f64, params: &NetworkParams, ratio_pow: f64) -> f64 {
    let x = theta * ratio_pow / (params.n_h as f64 * params.eta);
    x / (1.0 + x)
}

/// Mean Laplace factor of one uncovered MU with its ratio rounded up.
pub fn q1(theta: f64, params: &NetworkParams, probs: &PartitionProbs) -> f64 {
    let k = &probs.kappas;
    let a = params.alpha;
    let mut loss = probs.p0 * hop_loss(theta, params, k[0].powf(a));
    for i in 1..=probs.t() {
        loss += probs.p_plus[i - 1] * hop_loss(theta, params, k[i - 1].powf(-a));
        loss += probs.p_minus[i - 1] * hop_loss(theta, params, k[i].powf(a));
    }
    1.0 - loss
}

/// Mean Laplace factor of one uncovered MU with its ratio rounded down.
pub fn q2(theta: f64, params: &NetworkParams, probs: &PartitionProbs) -> f64 {
    let k = &probs.kappas;
    let a = params.alpha;
    let mut loss = 0.0;
    for i in 1..=probs.t() {
        loss += probs.p_plus[i - 1] * hop_loss(theta, params, k[i].powf(-a));
        loss += probs.p_minus[i - 1] * hop_loss(theta, params, k[i - 1].powf(a));
    }
    1.0 - loss
}

fn check_tag(op: &'static str, d: f64, params: &NetworkParams) -> Result<()> {
    if !(d > 0.0 && d < params.radius) {
        return domain(op, format!("need 0 < d < R, got d={d}"));
    }
    Ok(())
}

/// `ln(1 + theta / (eta n_h k^alpha))`, infinite at `k = 0` for `theta > 0`.
fn attenuated_log(theta: f64, params: &NetworkParams, k: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    (theta / (params.eta * params.n_h as f64 * k.powf(params.alpha))).ln_1p()
}

/// Outage upper bound for an MU served by a FAP at distance `d`.
pub fn thm1_upper(theta: f64, d: f64, params: &NetworkParams) -> Result<BoundSet> {
    check_tag("thm1_upper", d, params)?;
    if theta.is_nan() || theta < 0.0 {
        return domain("thm1_upper", "theta must be non-negative");
    }
    if params.n_c == 0 {
        return domain("thm1_upper", "n_c must be at least 1");
    }
    let grid = params.grid()?;
    let probs = partition_probs(d, &grid, params.radius)?;
    let q = q1(theta, params, &probs);
    let c = params.coverage_factor();
    let r = params.radius;
    let n_md = PI * (r * r - c * c * d * d) * params.mu_m;
    let s = attenuated_log(theta, params, params.kappa_o);
    let phi = laplace_nmns_exact(s, d, params)?;
    let co = (-((params.n_c - 1) as f64) * (theta / params.n_h as f64).ln_1p()).exp();
    let raw = 1.0 - co * (n_md * (q - 1.0)).exp() * phi;
    Ok(BoundSet::new(0.0, clip01(raw))
        .with("q1", q)
        .with("nbar_m_d", n_md)
        .with("nbar_mu_d", nbar_mu_d(d, params)?)
        .with("phi_ns", phi)
        .with("upper_raw", raw))
}

/// `gamma_1, gamma_2, gamma_3` at `(theta, q2)`.
pub fn gammas(theta: f64, q2: f64, params: &NetworkParams) -> (f64, f64, f64) {
    let c = params.coverage_factor();
    let g1 = PI * (1.0 - q2) * c * c * params.mu_m;
    let g2 = theta / (params.eta * params.n_h as f64 * (1.0 + params.kappa).powf(params.alpha));
    let g3 = PI * params.mu_m * coverage_gap(params);
    (g1, g2, g3)
}

/// The integrand behind `gamma_4` for a FAP of interest at `(d, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gamma4Kernel {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub alpha: f64,
    pub d: f64,
    pub radius: f64,
}

impl Gamma4Kernel {
    pub fn new(theta: f64, d: f64, params: &NetworkParams) -> Result<Self> {
        check_tag("gamma4", d, params)?;
        let probs = partition_probs(d, &params.grid()?, params.radius)?;
        let q = q2(theta, params, &probs);
        let (gamma1, gamma2, gamma3) = gammas(theta, q, params);
        let k = Self {
            gamma1,
            gamma2,
            gamma3,
            alpha: params.alpha,
            d,
            radius: params.radius,
        };
        k.check()?;
        Ok(k)
    }

    fn check(&self) -> Result<()> {
        if self.gamma1 * self.radius * self.radius > MAX_EXPONENT {
            return Err(Error::Overflow(format!(
                "gamma1 R^2 = {} makes the gamma4 integrand overflow",
                self.gamma1 * self.radius * self.radius
            )));
        }
        Ok(())
    }

    /// Integrand at another FAP located at `p`.
    pub fn eval(&self, p: Point) -> f64 {
        let d1 = p.norm();
        let d2 = p.dist(Point::new(self.d, 0.0));
        let t = self.gamma2 * d1.powf(self.alpha);
        let frac = if t == 0.0 {
            0.0
        } else {
            t / (d2.powf(self.alpha) + t)
        };
        (d1 * d1 * (self.gamma1 - self.gamma3 * frac)).exp()
    }

    /// The `gamma_2 -> inf` limit of the integrand.
    pub fn eval_saturated(&self, p: Point) -> f64 {
        let d1 = p.norm();
        (d1 * d1 * (self.gamma1 - self.gamma3)).exp()
    }
}

/// `gamma_4` by composite Gauss-Legendre over the disk in polar
/// coordinates, with radial panels split at the FAP of interest.
pub fn gamma4_quadrature(kernel: &Gamma4Kernel) -> f64 {
    gamma4_quadrature_with(kernel, |k, p| k.eval(p))
}

pub(crate) fn gamma4_quadrature_with(
    kernel: &Gamma4Kernel,
    f: impl Fn(&Gamma4Kernel, Point) -> f64,
) -> f64 {
    let (x, w) = gauss_legendre(16);
    let r = kernel.radius;
    let d = kernel.d;
    // dense panels around r = d and phi = 0 where the integrand dips
    let mut r_cuts = vec![0.0];
    for f in [0.5, 0.8, 0.9, 0.95, 0.98, 1.0, 1.02, 1.05, 1.1, 1.2, 1.5] {
        let c = f * d;
        if c > 0.0 && c < r {
            r_cuts.push(c);
        }
    }
    r_cuts.push(r);
    r_cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r_cuts.dedup();
    let phi_cuts = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, PI];
    let mut total = 0.0;
    for rp in r_cuts.windows(2) {
        let (ra, rb) = (rp[0], rp[1]);
        for pp in phi_cuts.windows(2) {
            let (pa, pb) = (pp[0], pp[1]);
            for (xi, wi) in x.iter().zip(&w) {
                let rr = 0.5 * (rb - ra) * xi + 0.5 * (rb + ra);
                let wr = 0.5 * (rb - ra) * wi;
                for (xj, wj) in x.iter().zip(&w) {
                    let ph = 0.5 * (pb - pa) * xj + 0.5 * (pb + pa);
                    let wp = 0.5 * (pb - pa) * wj;
                    total += wr * wp * rr * f(kernel, Point::polar(rr, ph));
                }
            }
        }
    }
    // the half-disk integral counts twice; area element normalized by pi R^2
    2.0 * total / (PI * r * r)
}

fn fap_count_ratio(nbar_fap: f64, chi: f64) -> f64 {
    if nbar_fap == 0.0 {
        return 1.0;
    }
    (-nbar_fap).exp() * (nbar_fap * chi).exp_m1() / (-(-nbar_fap).exp_m1() * chi)
}

/// Outage lower bound for an MU served by a FAP at distance `d`, given
/// `gamma_4` from quadrature or simulation. The `1 + O(kappa^alpha)`
/// correction is dropped.
pub fn thm2_lower(
    theta: f64,
    d: f64,
    params: &NetworkParams,
    gamma4: f64,
    phi: PhiMode,
) -> Result<BoundSet> {
    check_tag("thm2_lower", d, params)?;
    if theta.is_nan() || theta < 0.0 {
        return domain("thm2_lower", "theta must be non-negative");
    }
    let grid = params.grid()?;
    let probs = partition_probs(d, &grid, params.radius)?;
    let q = q2(theta, params, &probs);
    let (g1, g2, g3) = gammas(theta, q, params);
    let r2 = params.radius * params.radius;
    let p = fu_overflow_prob(params)?;
    let chi = one_minus_exp_neg_over_x(g1 * r2) * (1.0 - p) + gamma4 * p;
    let ratio = fap_count_ratio(params.nbar_fap(), chi);
    let s = attenuated_log(theta, params, params.kappa);
    let phi_v = match phi {
        PhiMode::Exact => laplace_nmns_exact(s, d, params)?,
        PhiMode::LemmaUpper => laplace_nmns_ub(s, d, params)?,
    };
    let raw = 1.0 - (-params.nbar_mu() * (1.0 - q)).exp() * ratio * phi_v;
    Ok(BoundSet::new(clip01(raw), 1.0)
        .with("q2", q)
        .with("gamma1", g1)
        .with("gamma2", g2)
        .with("gamma3", g3)
        .with("gamma4", gamma4)
        .with("chi", chi)
        .with("fap_ratio", ratio)
        .with("phi_ns", phi_v)
        .with("lower_raw", raw))
}

/// Both FAP-served bounds at `d`, with `gamma_4` by quadrature.
pub fn fap_bounds(theta: f64, d: f64, params: &NetworkParams, phi: PhiMode) -> Result<BoundSet> {
    let up = thm1_upper(theta, d, params)?;
    let g4 = gamma4_quadrature(&Gamma4Kernel::new(theta, d, params)?);
    let lo = thm2_lower(theta, d, params, g4, phi)?;
    let mut out = BoundSet::new(lo.lower, up.upper);
    out.intermediates = up.intermediates;
    out.intermediates.extend(lo.intermediates);
    Ok(out)
}

/// Outage bracket for an MU served by the MBS, with the count transform
/// replaced by its lower and upper bounds.
pub fn thm3_bounds(theta: f64, params: &NetworkParams) -> Result<BoundSet> {
    if theta.is_nan() || theta < 0.0 {
        return domain("thm3_bounds", "theta must be non-negative");
    }
    let c = params.coverage_factor();
    let nbar = params.nbar_mu();
    let n_o = nbar * c * c;
    let eps = (-nbar + params.nbar_fap() * (expm1_over_x(n_o) - 1.0)).exp();
    if !(eps < 1.0) {
        return Err(Error::Degenerate(format!("epsilon = {eps} is not below 1")));
    }
    let a_inv = 1.0 + theta / params.n_h as f64;
    let s = (theta / params.n_h as f64).ln_1p();
    let (phi_lb, phi_ub) = laplace_nmbm_bounds(s, params)?;
    let lb_raw = 1.0 - a_inv / (1.0 - eps) * phi_ub;
    let ub_raw = 1.0 - a_inv * (phi_lb - eps);
    Ok(BoundSet::new(clip01(lb_raw), clip01(ub_raw))
        .with("eps", eps)
        .with("nbar_o", n_o)
        .with("phi_lb", phi_lb)
        .with("phi_ub", phi_ub)
        .with("beta", lemma2_beta(s, params)?)
        .with("lower_raw", lb_raw)
        .with("upper_raw", ub_raw))
}

/// Bounds on the density of `d(u, b_m)` for a uniform point covered by no
/// FAP, evaluated at distance `x`.
pub fn pdf_du_bounds(x: f64, params: &NetworkParams) -> Result<(f64, f64)> {
    if params.kappa > 0.5 {
        return domain("pdf_Du_bounds", "derivation assumes kappa <= 0.5");
    }
    let r = params.radius;
    if !(0.0..=r).contains(&x) {
        return domain("pdf_Du_bounds", format!("need 0 <= d <= R, got {x}"));
    }
    let k = params.kappa;
    let kx = params.nbar_fap() * k * k;
    let shrink = 1.0 - 2.0 * k;
    let u = x * x / (r * r);
    let base = 2.0 * x / (r * r);
    let lb = (-kx * u).exp() / one_minus_exp_neg_over_x(shrink * kx) * base;
    let ub = (-kx * shrink * u).exp() / one_minus_exp_neg_over_x(kx) * base;
    Ok((lb, ub))
}

/// Conditional density of the tagged FAP distance given that it serves at
/// least one MU, up to normalization: `2r/R^2 * P(N1 >= 1) * P(N2 < n_c)`.
fn serving_weight(r: f64, params: &NetworkParams) -> Result<f64> {
    let rr = params.radius;
    Ok(2.0 * r / (rr * rr) * -(-nbar_mu_d(r, params)?).exp_m1())
}

/// FAP-served bounds averaged over the tagged FAP distance, weighted by
/// the chance that a FAP at that distance serves an MU.
pub fn fap_bounds_averaged(
    theta: f64,
    params: &NetworkParams,
    phi: PhiMode,
    nodes: usize,
) -> Result<BoundSet> {
    let (x, w) = gauss_legendre(nodes);
    let r = params.radius;
    let (mut lo, mut up, mut norm) = (0.0, 0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let d = 0.5 * r * (xi + 1.0);
        let wt = 0.5 * r * wi * serving_weight(d, params)?;
        let b = fap_bounds(theta, d, params, phi)?;
        lo += wt * b.lower;
        up += wt * b.upper;
        norm += wt;
    }
    if !(norm > 0.0) {
        return Err(Error::Degenerate("no FAP distance can serve an MU".into()));
    }
    Ok(BoundSet::new(lo / norm, up / norm))
}
