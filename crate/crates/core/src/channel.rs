//! Rayleigh fading, power control and frequency-hopping interference.
//!
//! Under power control every transmitter reaches its serving station at a
//! fixed level (`p_f` at FAPs, `p_m` at the MBS), so an interferer's mean
//! received power at another station is its target level times a distance
//! ratio to the power `alpha`. Those pre-fading levels are the interferer
//! *weights* below. Hopping over `n_s * n_h` subchannels divides each
//! interferer by `g = n_s n_h` on average.

use crate::access::{Assignment, Server};
use crate::deployment::Realization;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::params::NetworkParams;
use rand::Rng;
use rand_distr::{Distribution, Exp};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InterferenceModel {
    /// Every interferer in the network.
    #[default]
    Full,
    /// Drops cross-tier terms whose distance ratio is at most `kappa`:
    /// other-FAP users at a FAP, and all FAP users at the MBS.
    Simplified,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Hopping {
    /// Deterministic attenuation by `n_s * n_h`.
    #[default]
    Averaged,
    /// Each interferer lands on the victim's subchannel with probability
    /// `1/n_h` and then contributes at power `1/n_s`.
    Collision,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChannelModel {
    pub interference: InterferenceModel,
    pub hopping: Hopping,
}

/// Target received powers. Only their ratio matters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Powers {
    pub p_m: f64,
    pub p_f: f64,
}

impl Powers {
    pub fn from_params(params: &NetworkParams) -> Self {
        Self {
            p_m: params.p_m(),
            p_f: params.p_f(),
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            p_m: self.p_m * c,
            p_f: self.p_f * c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingDraw {
    pub power_gain: f64,
}

pub fn sample_fading<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> FadingDraw {
    let exp = Exp::new(1.0).expect("unit rate");
    FadingDraw {
        power_gain: sigma2 * exp.sample(rng),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SirSample {
    pub signal: f64,
    pub interference: f64,
    pub sir: f64,
}

/// `signal / interference`, infinite when nothing interferes.
pub fn sir(signal: f64, interference: f64) -> SirSample {
    let sir = if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    };
    SirSample {
        signal,
        interference,
        sir,
    }
}

fn ratio_pow(num: Point, a: Point, b: Point, alpha: f64) -> f64 {
    (num.dist(a) / num.dist(b)).powf(alpha)
}

fn fap_of(assignment: &Assignment, u: usize) -> Result<usize> {
    match assignment.serving.get(u) {
        Some(Server::Fap(a)) => Ok(*a),
        Some(Server::Mbs) => Err(Error::Precondition(format!(
            "MU {u} is not served by a FAP"
        ))),
        None => Err(Error::Precondition(format!("no MU with index {u}"))),
    }
}

/// Pre-fading interferer levels at the FAP serving MU `tagged_mu`.
pub fn mu_fap_weights(
    realization: &Realization,
    assignment: &Assignment,
    tagged_mu: usize,
    powers: Powers,
    alpha: f64,
    model: InterferenceModel,
) -> Result<Vec<f64>> {
    let a = fap_of(assignment, tagged_mu)?;
    let pos_a = realization.faps[a];
    let co_cell = realization.fus[a].len() + assignment.served_by_fap[a].len() - 1;
    let mut w = vec![powers.p_f; co_cell];
    if model == InterferenceModel::Full {
        for (f, &pos_f) in realization.faps.iter().enumerate() {
            if f == a {
                continue;
            }
            let users = realization.fus[f].iter().copied().chain(
                assignment.served_by_fap[f]
                    .iter()
                    .map(|&u| realization.mus[u]),
            );
            for u in users {
                w.push(powers.p_f * ratio_pow(u, pos_f, pos_a, alpha));
            }
        }
    }
    for u in assignment.mbs_served() {
        let p = realization.mus[u];
        w.push(powers.p_m * ratio_pow(p, Point::ORIGIN, pos_a, alpha));
    }
    Ok(w)
}

/// Pre-fading interferer levels at the MBS for MBS-served MU `tagged_mu`.
pub fn mu_mbs_weights(
    realization: &Realization,
    assignment: &Assignment,
    tagged_mu: usize,
    powers: Powers,
    alpha: f64,
    model: InterferenceModel,
) -> Result<Vec<f64>> {
    match assignment.serving.get(tagged_mu) {
        Some(Server::Mbs) => {}
        _ => {
            return Err(Error::Precondition(format!(
                "MU {tagged_mu} is not served by the MBS"
            )))
        }
    }
    let others = assignment.mbs_count() - 1;
    let mut w = vec![powers.p_m; others];
    if model == InterferenceModel::Full {
        for (f, &pos_f) in realization.faps.iter().enumerate() {
            let users = realization.fus[f].iter().copied().chain(
                assignment.served_by_fap[f]
                    .iter()
                    .map(|&u| realization.mus[u]),
            );
            for u in users {
                w.push(powers.p_f * ratio_pow(u, pos_f, Point::ORIGIN, alpha));
            }
        }
    }
    Ok(w)
}

/// Total interference from pre-fading levels, drawing one fading gain per
/// interferer in order.
pub fn interference_from_weights<R: Rng + ?Sized>(
    weights: &[f64],
    params: &NetworkParams,
    hopping: Hopping,
    rng: &mut R,
) -> f64 {
    match hopping {
        Hopping::Averaged => {
            let g = params.hopping_gain();
            weights
                .iter()
                .map(|w| w * sample_fading(params.sigma2, rng).power_gain)
                .sum::<f64>()
                / g
        }
        Hopping::Collision => {
            let p_hit = 1.0 / params.n_h as f64;
            let mut total = 0.0;
            for w in weights {
                let h = sample_fading(params.sigma2, rng).power_gain;
                if rng.random::<f64>() < p_hit {
                    total += w * h;
                }
            }
            total / params.n_s as f64
        }
    }
}

pub fn interference_mu_fap<R: Rng + ?Sized>(
    realization: &Realization,
    assignment: &Assignment,
    tagged_mu: usize,
    params: &NetworkParams,
    model: ChannelModel,
    rng: &mut R,
) -> Result<f64> {
    let w = mu_fap_weights(
        realization,
        assignment,
        tagged_mu,
        Powers::from_params(params),
        params.alpha,
        model.interference,
    )?;
    Ok(interference_from_weights(&w, params, model.hopping, rng))
}

pub fn interference_mu_mbs<R: Rng + ?Sized>(
    realization: &Realization,
    assignment: &Assignment,
    tagged_mu: usize,
    params: &NetworkParams,
    model: ChannelModel,
    rng: &mut R,
) -> Result<f64> {
    let w = mu_mbs_weights(
        realization,
        assignment,
        tagged_mu,
        Powers::from_params(params),
        params.alpha,
        model.interference,
    )?;
    Ok(interference_from_weights(&w, params, model.hopping, rng))
}

/// Received signal power in one subband for a user whose station targets
/// `power`.
pub fn signal_power(power: f64, fading: FadingDraw, params: &NetworkParams) -> f64 {
    power * fading.power_gain / params.n_s as f64
}

/// `SIR < theta` for a user whose serving station targets `power`.
pub fn sir_outage_indicator(
    signal_fading: FadingDraw,
    interference: f64,
    power: f64,
    params: &NetworkParams,
) -> bool {
    sir(signal_power(power, signal_fading, params), interference).sir < params.theta
}

/// Exact outage probability given the interferer levels, averaging only
/// over fading (and subchannel collisions).
pub fn conditional_outage(
    weights: &[f64],
    power: f64,
    params: &NetworkParams,
    hopping: Hopping,
) -> f64 {
    let nh = params.n_h as f64;
    let survive: f64 = weights
        .iter()
        .map(|w| {
            let x = params.theta * w / power;
            match hopping {
                Hopping::Averaged => 1.0 / (1.0 + x / nh),
                Hopping::Collision => 1.0 - 1.0 / nh + 1.0 / (nh * (1.0 + x)),
            }
        })
        .product();
    1.0 - survive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::{assign, classify};
    use crate::deployment::sample_realization;
    use crate::rng::{derive_stream, Lane, StreamLabel};

    fn rng(name: &str) -> crate::rng::SimRng {
        derive_stream(77, &StreamLabel::root(name)).rng()
    }

    #[test]
    fn fading_moments() {
        let mut r = rng("fade");
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_fading(1.0, &mut r).power_gain)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
        let tail = draws.iter().filter(|&&h| h > 1.0).count() as f64 / n as f64;
        assert!((tail - (-1.0f64).exp()).abs() < 0.002);
        assert!(draws.iter().all(|&h| h >= 0.0));
    }

    #[test]
    fn independent_streams_are_uncorrelated() {
        let mut a = rng("a");
        let mut b = rng("b");
        let n = 200_000;
        let xs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                (
                    sample_fading(1.0, &mut a).power_gain,
                    sample_fading(1.0, &mut b).power_gain,
                )
            })
            .collect();
        let (mx, my) = xs.iter().fold((0.0, 0.0), |(p, q), (x, y)| (p + x, q + y));
        let (mx, my) = (mx / n as f64, my / n as f64);
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in &xs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
        }
        assert!((sxy / (sxx * syy).sqrt()).abs() < 0.01);
    }

    /// Tagged FAP at (500, 0) serving MU 0, plus the given MBS-served MUs.
    fn fixed(mbs_mus: &[Point], co_cell_fus: usize) -> (Realization, Assignment) {
        let a = Point::new(500.0, 0.0);
        let mut mus = vec![Point::new(520.0, 0.0)];
        mus.extend_from_slice(mbs_mus);
        let mut serving = vec![Server::Fap(0)];
        serving.extend(std::iter::repeat_n(Server::Mbs, mbs_mus.len()));
        let n = mus.len();
        let r = Realization {
            faps: vec![a],
            tagged_fap: Some(0),
            mus,
            fus: vec![vec![Point::new(510.0, 0.0); co_cell_fus]],
        };
        let asg = Assignment {
            serving,
            candidate: (0..n).map(|i| (i == 0).then_some(0)).collect(),
            served_by_fap: vec![vec![0]],
        };
        (r, asg)
    }

    /// A point with `|u| / d(u, a) = delta` on the segment MBS to FAP at
    /// (500, 0).
    fn at_delta(delta: f64) -> Point {
        Point::new(500.0 * delta / (1.0 + delta), 0.0)
    }

    #[test]
    fn single_mbs_interferer_term() {
        let p = NetworkParams::default();
        let u = at_delta(5.0);
        let (r, a) = fixed(&[u], 0);
        let w = mu_fap_weights(
            &r,
            &a,
            0,
            Powers::from_params(&p),
            p.alpha,
            InterferenceModel::Full,
        )
        .unwrap();
        assert_eq!(w.len(), 1);
        let term = w[0] / p.hopping_gain();
        let want = p.p_m() * 625.0 / 32768.0;
        assert!((term - want).abs() < 1e-12 * want);
        assert!((term - (p.p_f() / 40.0) * 625.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn no_interferers_gives_zero_and_no_outage() {
        let p = NetworkParams::default();
        let (r, a) = fixed(&[], 0);
        let mut g = rng("none");
        let i = interference_mu_fap(&r, &a, 0, &p, ChannelModel::default(), &mut g).unwrap();
        assert_eq!(i, 0.0);
        assert!(!sir_outage_indicator(
            FadingDraw { power_gain: 1e-300 },
            i,
            p.p_f(),
            &p
        ));
        assert!(sir(1.0, 0.0).sir.is_infinite());
    }

    #[test]
    fn theta_zero_never_outage() {
        let p = NetworkParams {
            theta: 0.0,
            ..Default::default()
        };
        assert!(!sir_outage_indicator(
            FadingDraw { power_gain: 0.0 },
            5.0,
            1.0,
            &p
        ));
    }

    #[test]
    fn mbs_co_served_sum() {
        let p = NetworkParams::default();
        let mus: Vec<Point> = (0..6)
            .map(|i| Point::new(-100.0 - i as f64, 30.0))
            .collect();
        let r = Realization {
            faps: vec![],
            tagged_fap: None,
            mus,
            fus: vec![],
        };
        let asg = Assignment {
            serving: vec![Server::Mbs; 6],
            candidate: vec![None; 6],
            served_by_fap: vec![],
        };
        let w = mu_mbs_weights(
            &r,
            &asg,
            2,
            Powers::from_params(&p),
            p.alpha,
            InterferenceModel::Full,
        )
        .unwrap();
        let i: f64 = w.iter().map(|w| w * 1.0).sum::<f64>() / p.hopping_gain();
        assert!((i - 5.0 * p.p_m() / 32768.0).abs() < 1e-15);

        let only = Assignment {
            serving: vec![Server::Mbs],
            candidate: vec![None],
            served_by_fap: vec![],
        };
        let r1 = Realization {
            mus: vec![Point::new(3.0, 4.0)],
            ..r
        };
        let mut g = rng("solo");
        assert_eq!(
            interference_mu_mbs(&r1, &only, 0, &p, ChannelModel::default(), &mut g).unwrap(),
            0.0
        );
    }

    #[test]
    fn wrong_tier_is_a_precondition_error() {
        let p = NetworkParams::default();
        let (r, a) = fixed(&[at_delta(3.0)], 0);
        assert!(mu_fap_weights(
            &r,
            &a,
            1,
            Powers::from_params(&p),
            4.0,
            InterferenceModel::Full
        )
        .is_err());
        assert!(mu_mbs_weights(
            &r,
            &a,
            0,
            Powers::from_params(&p),
            4.0,
            InterferenceModel::Full
        )
        .is_err());
    }

    #[test]
    fn power_scaling_leaves_sir_unchanged() {
        let p = NetworkParams::default();
        let s = derive_stream(3, &StreamLabel::root("scale"));
        let mut checked = 0;
        for i in 0..200 {
            let st = s.trial(i);
            let r = sample_realization(&p, Some(600.0), &st).unwrap();
            let a = assign(&r, &p, &st);
            let Some(&u) = a.served_by_fap[0].first() else {
                continue;
            };
            checked += 1;
            let base = Powers::from_params(&p);
            let sirs: Vec<f64> = [1.0, 8.0, 0.125, 1024.0]
                .iter()
                .map(|&c| {
                    let pw = base.scaled(c);
                    let w =
                        mu_fap_weights(&r, &a, u, pw, p.alpha, InterferenceModel::Full).unwrap();
                    let mut fr = st.lane(Lane::Fading).rng();
                    let h0 = sample_fading(p.sigma2, &mut fr);
                    let i = interference_from_weights(&w, &p, Hopping::Averaged, &mut fr);
                    sir(signal_power(pw.p_f, h0, &p), i).sir
                })
                .collect();
            assert!(sirs.iter().all(|s| s.to_bits() == sirs[0].to_bits()));
        }
        assert!(checked > 20);
    }

    #[test]
    fn sigma2_cancels_in_outage() {
        let base = NetworkParams {
            theta: 8.0,
            ..Default::default()
        };
        let (r, a) = fixed(&[at_delta(9.0), at_delta(6.0), Point::new(-200.0, 0.0)], 1);
        let n = 10_000;
        let rate = |sigma2: f64| {
            let p = NetworkParams {
                sigma2,
                ..base.clone()
            };
            let mut g = rng(&format!("s2-{sigma2}"));
            let w = mu_fap_weights(
                &r,
                &a,
                0,
                Powers::from_params(&p),
                p.alpha,
                InterferenceModel::Full,
            )
            .unwrap();
            (0..n)
                .filter(|_| {
                    let h0 = sample_fading(p.sigma2, &mut g);
                    let i = interference_from_weights(&w, &p, Hopping::Averaged, &mut g);
                    sir_outage_indicator(h0, i, p.p_f(), &p)
                })
                .count() as f64
                / n as f64
        };
        let (a1, a2) = (rate(1.0), rate(2.0));
        let pooled = 0.5 * (a1 + a2);
        let se = (2.0 * pooled * (1.0 - pooled) / n as f64).sqrt();
        assert!((a1 - a2).abs() < 3.0 * se + 1e-12, "{a1} {a2}");
    }

    fn mc_outage(
        weights: &[f64],
        power: f64,
        p: &NetworkParams,
        hopping: Hopping,
        n: usize,
        name: &str,
    ) -> f64 {
        let mut g = rng(name);
        (0..n)
            .filter(|_| {
                let h0 = sample_fading(p.sigma2, &mut g);
                let i = interference_from_weights(weights, p, hopping, &mut g);
                sir_outage_indicator(h0, i, power, p)
            })
            .count() as f64
            / n as f64
    }

    #[test]
    fn single_interferer_closed_form() {
        let p = NetworkParams {
            theta: 8.0,
            ..Default::default()
        };
        let delta: f64 = 12.0;
        let (r, a) = fixed(&[at_delta(delta)], 0);
        let w = mu_fap_weights(
            &r,
            &a,
            0,
            Powers::from_params(&p),
            p.alpha,
            InterferenceModel::Full,
        )
        .unwrap();
        let want = 1.0 - 1.0 / (1.0 + p.theta * delta.powf(4.0) / (p.eta * p.n_h as f64));
        assert!((conditional_outage(&w, p.p_f(), &p, Hopping::Averaged) - want).abs() < 1e-9);
        let n = 100_000;
        let got = mc_outage(&w, p.p_f(), &p, Hopping::Averaged, n, "single");
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((got - want).abs() < 3.0 * se, "{got} vs {want}");
    }

    #[test]
    fn product_form_on_fixed_deployments() {
        let p = NetworkParams {
            theta: 4.0,
            ..Default::default()
        };
        let layouts: [(&[f64], usize); 4] = [
            (&[8.0, 10.0], 0),
            (&[5.0, 7.0, 9.0], 1),
            (&[11.0], 2),
            (&[6.0, 12.0, 3.0, 9.0], 0),
        ];
        for (k, (deltas, fus)) in layouts.iter().enumerate() {
            let pts: Vec<Point> = deltas.iter().map(|&d| at_delta(d)).collect();
            let (r, a) = fixed(&pts, *fus);
            for hop in [Hopping::Averaged, Hopping::Collision] {
                let w = mu_fap_weights(
                    &r,
                    &a,
                    0,
                    Powers::from_params(&p),
                    p.alpha,
                    InterferenceModel::Full,
                )
                .unwrap();
                let want = conditional_outage(&w, p.p_f(), &p, hop);
                let n = 50_000;
                let got = mc_outage(&w, p.p_f(), &p, hop, n, &format!("pf{k}{hop:?}"));
                let se = (want * (1.0 - want) / n as f64).sqrt().max(1.0 / n as f64);
                assert!(
                    (got - want).abs() < 3.0 * se,
                    "layout {k} {hop:?}: {got} vs {want}"
                );
            }
        }
    }

    /// Mean interference under both models, paired on the same fading:
    /// (sum full, sum simplified, mean per-realization relative gap).
    fn paired_means(mbs: bool) -> (f64, f64, f64) {
        let p = NetworkParams::default();
        let s = derive_stream(
            9,
            &StreamLabel::root(if mbs { "pair-mbs" } else { "pair-fap" }),
        );
        let (mut full, mut simp, mut rel, mut got) = (0.0, 0.0, 0.0, 0);
        let mut i = 0;
        while got < 1000 {
            let st = s.trial(i);
            i += 1;
            let r = sample_realization(&p, Some(800.0), &st).unwrap();
            let a = assign(&r, &p, &st);
            let tagged = if mbs {
                a.mbs_served().next()
            } else {
                classify(&r, &a, None).unwrap().served.first().copied()
            };
            let Some(u) = tagged else { continue };
            got += 1;
            let pw = Powers::from_params(&p);
            let weights = |m| {
                if mbs {
                    mu_mbs_weights(&r, &a, u, pw, p.alpha, m).unwrap()
                } else {
                    mu_fap_weights(&r, &a, u, pw, p.alpha, m).unwrap()
                }
            };
            // mean over fading is the weight sum over g
            let f: f64 = weights(InterferenceModel::Full).iter().sum();
            let s: f64 = weights(InterferenceModel::Simplified).iter().sum();
            full += f;
            simp += s;
            if f > 0.0 {
                rel += (f - s) / f;
            }
        }
        (full, simp, rel / got as f64)
    }

    #[test]
    fn simplified_fap_interference_is_close() {
        let (full, simp, _) = paired_means(false);
        assert!(full >= simp);
        assert!((full - simp) / full < 0.05, "{}", (full - simp) / full);
    }

    #[test]
    fn simplified_mbs_interference_is_close() {
        let (full, simp, rel) = paired_means(true);
        assert!(full >= simp);
        assert!(rel < 0.01, "{rel}");
    }
}
