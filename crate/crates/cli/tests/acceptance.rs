//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! `ACCEPTANCE_ONLY=1,4` runs a subset.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::time::Instant;
use twotier::access::{Assignment, Server};
use twotier::bounds::{fap_bounds, thm1_upper, thm3_bounds, PhiMode};
use twotier::channel::{ChannelModel, Hopping, InterferenceModel};
use twotier::deployment::Realization;
use twotier::geometry::Point;
use twotier::montecarlo::{
    estimate_outage_fixed, simulate_mu_fap, simulate_mu_mbs, OutageEstimate, TagDistance,
    TrialBudget,
};
use twotier::rng::{derive_stream, RngStream, StreamLabel};
use twotier::NetworkParams;
use twotier_cli::validate::{self, all_pass, Check};
use twotier_cli::{run, write_csv, Compute, ExperimentConfig, Sweep, SweepVar, TagSpec, Target};

const SEED: u64 = 20_240_601;
const TRIALS: u64 = 100_000;
const SIGMAS: f64 = 3.0;
const THETAS: [f64; 3] = [0.5, 2.0, 8.0];

struct Outcome {
    pass: bool,
    summary: String,
    /// Extra lines shown under the verdict.
    lines: Vec<String>,
}

impl Outcome {
    fn from_checks(summary: impl Into<String>, checks: &[Check]) -> Self {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| c.pass == Some(false))
            .map(|c| c.to_string())
            .collect();
        let info: Vec<String> = checks
            .iter()
            .filter(|c| c.pass.is_none())
            .map(|c| c.to_string())
            .collect();
        Outcome {
            pass: all_pass(checks),
            summary: format!(
                "{} ({} checks, {} failed, {} informational)",
                summary.into(),
                checks.len(),
                failed.len(),
                info.len()
            ),
            lines: failed.into_iter().chain(info).collect(),
        }
    }
}

fn stream(name: &str, a: u64, b: u64) -> RngStream {
    derive_stream(SEED, &StreamLabel::root(name).with("a", a).with("b", b))
}

fn check(name: String, pass: bool, detail: String) -> Check {
    Check {
        name,
        pass: Some(pass),
        detail,
    }
}

fn within(est: &OutageEstimate, lo: f64, hi: f64) -> bool {
    lo - SIGMAS * est.std_err <= est.p_hat && est.p_hat <= hi + SIGMAS * est.std_err
}

fn sandwich() -> Outcome {
    let base = NetworkParams::default();
    let mut checks = Vec::new();
    for d in [200.0, 400.0, 600.0, 800.0, 950.0] {
        for n_c in [1u64, 2, 3, 5, 10] {
            let p = NetworkParams {
                n_c,
                ..base.clone()
            };
            let s = simulate_mu_fap(
                &p,
                TagDistance::Fixed(d),
                ChannelModel::default(),
                TrialBudget::new(TRIALS),
                &stream("sandwich", d as u64, n_c),
            )
            .expect("simulation");
            for theta in THETAS {
                let name = format!("d={d} n_c={n_c} theta={theta}");
                let (est, b) = match (s.outage(theta), fap_bounds(theta, d, &p, PhiMode::Exact)) {
                    (Ok(e), Ok(b)) => (e, b),
                    (e, b) => {
                        checks.push(check(name, false, format!("{:?} {:?}", e.err(), b.err())));
                        continue;
                    }
                };
                checks.push(check(
                    name,
                    within(&est, b.lower, b.upper),
                    format!(
                        "lower {:.4e} mc {:.4e} ± {:.1e} upper {:.4e}",
                        b.lower, est.p_hat, est.std_err, b.upper
                    ),
                ));
            }
        }
    }
    Outcome::from_checks("lower - 3se <= mc <= upper + 3se", &checks)
}

fn mbs_bracket() -> Outcome {
    let mut checks = Vec::new();
    for (i, mu_m) in [20e-6, 40e-6, 80e-6].into_iter().enumerate() {
        let p = NetworkParams {
            mu_m,
            ..Default::default()
        };
        let s = simulate_mu_mbs(
            &p,
            ChannelModel::default(),
            TrialBudget::new(TRIALS),
            &stream("mbs", i as u64, 0),
        )
        .expect("simulation");
        for theta in THETAS {
            let name = format!("mu_m={mu_m} theta={theta}");
            match (s.outage(theta), thm3_bounds(theta, &p)) {
                (Ok(e), Ok(b)) => checks.push(check(
                    name,
                    within(&e, b.lower, b.upper),
                    format!(
                        "lower {:.4e} mc {:.4e} ± {:.1e} upper {:.4e}",
                        b.lower, e.p_hat, e.std_err, b.upper
                    ),
                )),
                (e, b) => checks.push(check(name, false, format!("{:?} {:?}", e.err(), b.err()))),
            }
        }
    }
    Outcome::from_checks("bracket contains MBS-served mc ± 3se", &checks)
}

fn backhaul_convergence() -> Outcome {
    let d = 800.0;
    let theta = NetworkParams::default().theta;
    let limited = NetworkParams {
        n_c: 20,
        ..Default::default()
    };
    let free = NetworkParams {
        n_c: 1_000_000,
        ..Default::default()
    };
    let u20 = thm1_upper(theta, d, &limited).expect("bound").upper;
    let uinf = thm1_upper(theta, d, &free).expect("bound").upper;
    let sim = |p: &NetworkParams, k| {
        simulate_mu_fap(
            p,
            TagDistance::Fixed(d),
            ChannelModel::default(),
            TrialBudget::new(TRIALS),
            &stream("converge", k, 0),
        )
        .and_then(|s| s.outage(theta))
        .expect("simulation")
    };
    let (m20, minf) = (sim(&limited, 20), sim(&free, 0));
    let se = (m20.std_err.powi(2) + minf.std_err.powi(2)).sqrt();
    let checks = [
        check(
            "upper bound n_c=20 vs 1e6".into(),
            (u20 - uinf).abs() < 1e-3,
            format!(
                "{u20:.6} vs {uinf:.6}, gap {:.3e} (limit 1e-3)",
                (u20 - uinf).abs()
            ),
        ),
        check(
            "simulation n_c=20 vs 1e6".into(),
            (m20.p_hat - minf.p_hat).abs() < SIGMAS * se,
            format!(
                "{:.5} vs {:.5}, gap {:.2e} (limit {:.2e})",
                m20.p_hat,
                minf.p_hat,
                (m20.p_hat - minf.p_hat).abs(),
                SIGMAS * se
            ),
        ),
    ];
    Outcome::from_checks("d=800, theta=2", &checks)
}

fn exact_phi_oracle() -> Outcome {
    let checks = validate::oracle(&NetworkParams::default(), 1_000_000, SEED).expect("oracle");
    Outcome::from_checks("3x3 (d, s) grid, 1e6 samples, double sum to 1e-10", &checks)
}

fn laplace_lemmas() -> Outcome {
    let p = NetworkParams::default();
    let mut checks = validate::lemma1(&p, TRIALS, SEED).expect("lemma1");
    let l2 = validate::lemma2(&p, TRIALS, SEED).expect("lemma2");
    // every s must be decided somewhere
    for s in validate::LAPLACE_S {
        let decided = l2
            .iter()
            .any(|c| c.pass.is_some() && c.name.ends_with(&format!("s={s}")));
        checks.push(check(
            format!("lemma2 s={s} decided"),
            decided,
            "needs one profile with enough effective samples".into(),
        ));
    }
    checks.extend(l2);
    Outcome::from_checks("bound directions at 3se, s in {0.1, 0.5, 1, 2}", &checks)
}

fn distance_density() -> Outcome {
    let checks = validate::appendix_b(&NetworkParams::default(), TRIALS, SEED).expect("appendixB");
    Outcome::from_checks(
        "20 bins within density bounds ± 3se; KS at kappa=0.02 < 0.02",
        &checks,
    )
}

fn exact_zero() -> Outcome {
    let p = NetworkParams {
        theta: 0.0,
        ..Default::default()
    };
    let mut checks = Vec::new();
    for d in [200.0, 800.0] {
        let e = simulate_mu_fap(
            &p,
            TagDistance::Fixed(d),
            ChannelModel::default(),
            TrialBudget::new(TRIALS),
            &stream("zero", d as u64, 0),
        )
        .and_then(|s| s.outage(0.0))
        .expect("simulation");
        checks.push(check(
            format!("mc d={d}"),
            e.p_hat == 0.0,
            format!("{}", e.p_hat),
        ));
        let u = thm1_upper(0.0, d, &p).expect("bound").upper;
        checks.push(check(format!("upper d={d}"), u == 0.0, format!("{u}")));
    }
    let m = simulate_mu_mbs(
        &p,
        ChannelModel::default(),
        TrialBudget::new(TRIALS),
        &stream("zero", 0, 1),
    )
    .and_then(|s| s.outage(0.0))
    .expect("simulation");
    checks.push(check(
        "mc mbs".into(),
        m.p_hat == 0.0,
        format!("{}", m.p_hat),
    ));
    Outcome::from_checks("theta = 0", &checks)
}

fn trend_check(name: &str, values: &[f64], est: &[OutageEstimate]) -> Check {
    let pts: Vec<(f64, f64)> = est.iter().map(|e| (e.p_hat, e.std_err)).collect();
    let stat = validate::decreasing_trend_statistic(&pts);
    let crit = ChiSquared::new((values.len() - 1) as f64)
        .expect("dof")
        .inverse_cdf(0.95);
    let curve: Vec<String> = values
        .iter()
        .zip(est)
        .map(|(v, e)| format!("{v}:{:.4}", e.p_hat))
        .collect();
    check(
        name.into(),
        stat <= crit,
        format!(
            "statistic {stat:.2} vs chi2 95% {crit:.2}; {}",
            curve.join(" ")
        ),
    )
}

fn monotone() -> Outcome {
    let sim = |p: &NetworkParams, tag: TagDistance, k: u64| {
        simulate_mu_fap(
            p,
            tag,
            ChannelModel::default(),
            TrialBudget::new(TRIALS),
            &stream("monotone", k, p.n_c),
        )
        .and_then(|s| s.outage(p.theta))
        .expect("simulation")
    };
    let d800 = TagDistance::Fixed(800.0);
    let ncs: Vec<f64> = (1..=10).map(f64::from).collect();
    let by_nc: Vec<OutageEstimate> = ncs
        .iter()
        .map(|&n| {
            sim(
                &NetworkParams {
                    n_c: n as u64,
                    ..Default::default()
                },
                d800,
                0,
            )
        })
        .collect();
    let kappas: Vec<f64> = (1..=10).map(|i| 0.02 * f64::from(i)).collect();
    let kappa_curve = |tag, offset: u64| -> Vec<OutageEstimate> {
        kappas
            .iter()
            .enumerate()
            .map(|(i, &kappa)| {
                sim(
                    &NetworkParams {
                        kappa,
                        ..Default::default()
                    },
                    tag,
                    offset + i as u64,
                )
            })
            .collect()
    };
    let by_kappa = kappa_curve(TagDistance::Uniform, 1);
    let mut fixed = trend_check("kappa 0.02..0.2 at d=800", &kappas, &kappa_curve(d800, 100));
    fixed.pass = None;
    let checks = [
        trend_check("n_c 1..10 at d=800", &ncs, &by_nc),
        trend_check("kappa 0.02..0.2, FAP distance averaged", &kappas, &by_kappa),
        fixed,
    ];
    Outcome::from_checks("isotonic nonincreasing fit not rejected at 95%", &checks)
}

/// A hand-built deployment and the pre-fading power of each interferer,
/// worked out from the layout.
struct Micro {
    name: &'static str,
    realization: Realization,
    assignment: Assignment,
    tagged: usize,
    serving_power: f64,
    weights: Vec<f64>,
    channel: ChannelModel,
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn norm(a: Point) -> f64 {
    (a.x * a.x + a.y * a.y).sqrt()
}

fn micro_deployments(p: &NetworkParams) -> Vec<Micro> {
    let (pm, pf, alpha) = (1.0, p.eta, p.alpha);
    let a0 = Point::new(600.0, 0.0);
    let a1 = Point::new(-400.0, 300.0);
    let fap_served = |fus0: Vec<Point>,
                      extra_served: Vec<Point>,
                      mbs: Vec<Point>,
                      other: Option<(Vec<Point>, Vec<Point>)>| {
        // tagged MU first, then co-served MUs, MBS MUs, MUs served by the other FAP
        let mut mus = vec![Point::new(606.0, 4.0)];
        let mut serving = vec![Server::Fap(0)];
        let mut served0 = vec![0];
        for u in extra_served {
            served0.push(mus.len());
            mus.push(u);
            serving.push(Server::Fap(0));
        }
        for u in mbs {
            mus.push(u);
            serving.push(Server::Mbs);
        }
        let mut faps = vec![a0];
        let mut fus = vec![fus0];
        let mut served = vec![served0];
        if let Some((fus1, mus1)) = other {
            faps.push(a1);
            fus.push(fus1);
            let mut s1 = Vec::new();
            for u in mus1 {
                s1.push(mus.len());
                mus.push(u);
                serving.push(Server::Fap(1));
            }
            served.push(s1);
        }
        let candidate = serving
            .iter()
            .map(|s| match s {
                Server::Fap(f) => Some(*f),
                Server::Mbs => None,
            })
            .collect();
        (
            Realization {
                faps,
                tagged_fap: Some(0),
                mus,
                fus,
            },
            Assignment {
                serving,
                candidate,
                served_by_fap: served,
            },
        )
    };
    let mbs_weight = |u: Point| pm * (norm(u) / dist(u, a0)).powi(alpha as i32);
    let other_weight = |u: Point| pf * (dist(u, a1) / dist(u, a0)).powi(alpha as i32);
    let fu = |dx: f64, dy: f64| Point::new(a0.x + dx, a0.y + dy);
    let mut out = Vec::new();

    let (r, a) = fap_served(vec![fu(12.0, 0.0)], vec![], vec![], None);
    out.push(Micro {
        name: "one FU",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![pf],
        channel: ChannelModel::default(),
    });

    let m = Point::new(520.0, 60.0);
    let (r, a) = fap_served(vec![], vec![], vec![m], None);
    out.push(Micro {
        name: "one MBS MU",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![mbs_weight(m)],
        channel: ChannelModel::default(),
    });

    let m = Point::new(640.0, -70.0);
    let (r, a) = fap_served(vec![fu(0.0, 11.0), fu(-13.0, 0.0)], vec![], vec![m], None);
    out.push(Micro {
        name: "two FUs one MBS MU",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![pf, pf, mbs_weight(m)],
        channel: ChannelModel::default(),
    });

    let (m1, m2) = (Point::new(560.0, 30.0), Point::new(700.0, 90.0));
    let (r, a) = fap_served(
        vec![fu(10.0, 10.0)],
        vec![Point::new(598.0, -5.0)],
        vec![m1, m2],
        None,
    );
    out.push(Micro {
        name: "FU, co-served MU, two MBS MUs",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![pf, pf, mbs_weight(m1), mbs_weight(m2)],
        channel: ChannelModel::default(),
    });

    let (o_fu, o_mu, m) = (
        Point::new(-389.0, 305.0),
        Point::new(-410.0, 290.0),
        Point::new(450.0, 0.0),
    );
    let (r, a) = fap_served(
        vec![fu(-12.0, -3.0)],
        vec![],
        vec![m],
        Some((vec![o_fu], vec![o_mu])),
    );
    out.push(Micro {
        name: "full mode, other FAP users",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![pf, other_weight(o_fu), other_weight(o_mu), mbs_weight(m)],
        channel: ChannelModel {
            interference: InterferenceModel::Full,
            hopping: Hopping::Averaged,
        },
    });

    let ms = [
        Point::new(400.0, 0.0),
        Point::new(420.0, 80.0),
        Point::new(380.0, -60.0),
        Point::new(750.0, 200.0),
        Point::new(300.0, 150.0),
    ];
    let (r, a) = fap_served(vec![], vec![], ms.to_vec(), None);
    out.push(Micro {
        name: "five MBS MUs",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: ms.iter().map(|&m| mbs_weight(m)).collect(),
        channel: ChannelModel::default(),
    });

    let m = Point::new(560.0, -40.0);
    let (r, a) = fap_served(vec![fu(14.0, 0.0), fu(0.0, -10.0)], vec![], vec![m], None);
    out.push(Micro {
        name: "collision hopping",
        realization: r,
        assignment: a,
        tagged: 0,
        serving_power: pf,
        weights: vec![pf, pf, mbs_weight(m)],
        channel: ChannelModel {
            interference: InterferenceModel::Full,
            hopping: Hopping::Collision,
        },
    });

    // MBS-served tagged MUs: index 1 of an all-MBS layout
    let mbs_only = |mus: Vec<Point>, faps: Vec<Point>, fus: Vec<Vec<Point>>| {
        let n = mus.len();
        Micro {
            name: "",
            assignment: Assignment {
                serving: vec![Server::Mbs; n],
                candidate: vec![None; n],
                served_by_fap: vec![vec![]; faps.len()],
            },
            realization: Realization {
                faps,
                tagged_fap: None,
                mus,
                fus,
            },
            tagged: 1,
            serving_power: pm,
            weights: vec![],
            channel: ChannelModel::default(),
        }
    };
    let mut m = mbs_only(
        vec![Point::new(100.0, 0.0), Point::new(-300.0, 200.0)],
        vec![],
        vec![],
    );
    m.name = "MBS, one co-served MU";
    m.weights = vec![pm];
    out.push(m);

    let mut m = mbs_only(
        (0..4)
            .map(|i| Point::polar(150.0 + 100.0 * f64::from(i), f64::from(i)))
            .collect(),
        vec![],
        vec![],
    );
    m.name = "MBS, three co-served MUs";
    m.weights = vec![pm; 3];
    out.push(m);

    let f = Point::new(300.0, 400.0);
    let (fu1, fu2) = (Point::new(311.0, 402.0), Point::new(296.0, 388.0));
    let mut m = mbs_only(
        vec![
            Point::new(-200.0, 0.0),
            Point::new(250.0, -100.0),
            Point::new(0.0, 700.0),
        ],
        vec![f],
        vec![vec![fu1, fu2]],
    );
    m.name = "MBS, full mode with FUs";
    m.weights = vec![
        pm,
        pm,
        pf * (dist(fu1, f) / norm(fu1)).powi(alpha as i32),
        pf * (dist(fu2, f) / norm(fu2)).powi(alpha as i32),
    ];
    m.channel = ChannelModel {
        interference: InterferenceModel::Full,
        hopping: Hopping::Averaged,
    };
    out.push(m);
    out
}

/// Outage from independent exponential fadings, interferer by interferer.
fn product_formula(weights: &[f64], power: f64, p: &NetworkParams, hopping: Hopping) -> f64 {
    let nh = p.n_h as f64;
    let keep: f64 = weights
        .iter()
        .map(|w| {
            let x = p.theta * w / power;
            match hopping {
                Hopping::Averaged => 1.0 / (1.0 + x / nh),
                Hopping::Collision => 1.0 - 1.0 / nh + 1.0 / (nh * (1.0 + x)),
            }
        })
        .product();
    1.0 - keep
}

fn micro_oracles() -> Outcome {
    let p = NetworkParams {
        theta: 300.0,
        ..Default::default()
    };
    let mut checks = Vec::new();
    for (i, m) in micro_deployments(&p).into_iter().enumerate() {
        let want = product_formula(&m.weights, m.serving_power, &p, m.channel.hopping);
        let e = estimate_outage_fixed(
            &m.realization,
            &m.assignment,
            m.tagged,
            &p,
            m.channel,
            TRIALS,
            &stream("micro", i as u64, 0),
        )
        .expect("estimate");
        checks.push(check(
            format!("{} ({} interferers)", m.name, m.weights.len()),
            (e.p_hat - want).abs() <= SIGMAS * e.std_err,
            format!("mc {:.5} ± {:.1e} formula {want:.5}", e.p_hat, e.std_err),
        ));
    }
    Outcome::from_checks(
        "10 fixed deployments within 3se of the product formula",
        &checks,
    )
}

fn csv_bytes(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    let rows = pool.install(|| run(cfg, Compute::BOTH)).expect("run");
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).expect("csv");
    buf
}

fn determinism() -> Outcome {
    let configs = [
        ExperimentConfig {
            trials: 5000,
            sweep: Sweep {
                var: SweepVar::NC,
                values: vec![1.0, 3.0, 6.0],
            },
            ..Default::default()
        },
        ExperimentConfig {
            trials: 5000,
            sweep: Sweep {
                var: SweepVar::Theta,
                values: THETAS.to_vec(),
            },
            tag: TagSpec::Averaged,
            ..Default::default()
        },
        ExperimentConfig {
            trials: 5000,
            sweep: Sweep {
                var: SweepVar::MuM,
                values: vec![20e-6, 40e-6],
            },
            target: Target::Mbs,
            ..Default::default()
        },
    ];
    let mut checks = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let one = csv_bytes(cfg, 1);
        for t in [4, 16] {
            let other = csv_bytes(cfg, t);
            checks.push(check(
                format!("sweep {i} threads 1 vs {t}"),
                one == other,
                format!("{} bytes", one.len()),
            ));
        }
        checks.push(check(
            format!("sweep {i} rerun"),
            csv_bytes(cfg, 1) == one,
            String::new(),
        ));
    }
    Outcome::from_checks("byte-identical CSV under 1, 4 and 16 threads", &checks)
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "sandwich", sandwich),
        (2, "mbs-bracket", mbs_bracket),
        (3, "backhaul-convergence", backhaul_convergence),
        (4, "exact-phi-oracle", exact_phi_oracle),
        (5, "laplace-lemmas", laplace_lemmas),
        (6, "distance-density", distance_density),
        (7, "exact-zero", exact_zero),
        (8, "monotonicity", monotone),
        (9, "micro-oracles", micro_oracles),
        (10, "determinism", determinism),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {n} {name}: {} [{:.1}s]",
            o.summary,
            t.elapsed().as_secs_f64()
        );
        for l in &o.lines {
            println!("    {l}");
        }
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
