//! Sweep runner: one result row per sweep value.

use crate::config::{apply_sweep, ExperimentConfig, SweepVar, TagSpec, Target};
use std::io::{self, Write};
use twotier::bounds::{fap_bounds, fap_bounds_averaged, thm3_bounds, BoundSet};
use twotier::montecarlo::{simulate_mu_fap, simulate_mu_mbs, SirSamples, TagDistance, TrialBudget};
use twotier::rng::{derive_stream, StreamLabel};
use twotier::NetworkParams;

/// Gauss-Legendre nodes used when bounds are averaged over the FAP distance.
pub const AVERAGING_NODES: usize = 64;

pub const CSV_HEADER: &str = "sweep_var,value,mc,mc_se,lb,ub,q1,q2,gamma4,chi,eps,n_conditioned";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Compute {
    pub mc: bool,
    pub bounds: bool,
}

impl Compute {
    pub const BOTH: Compute = Compute {
        mc: true,
        bounds: true,
    };
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    pub sweep_var: &'static str,
    pub value: f64,
    pub mc: Option<f64>,
    pub mc_se: Option<f64>,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub gamma4: Option<f64>,
    pub chi: Option<f64>,
    pub eps: Option<f64>,
    pub n_conditioned: u64,
    /// Why a requested column is missing. Not written to the CSV.
    pub notes: Vec<String>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            self.value,
            cell(self.mc),
            cell(self.mc_se),
            cell(self.lb),
            cell(self.ub),
            cell(self.q1),
            cell(self.q2),
            cell(self.gamma4),
            cell(self.chi),
            cell(self.eps),
            self.n_conditioned
        )
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

struct Point {
    value: f64,
    params: NetworkParams,
    tag: TagSpec,
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>, String> {
    cfg.sweep
        .values
        .iter()
        .map(|&value| {
            let mut params = cfg.params.clone();
            let mut tag = cfg.tag;
            apply_sweep(&mut params, &mut tag, cfg.sweep.var, value)?;
            Ok(Point { value, params, tag })
        })
        .collect()
}

fn simulate(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    tag: TagSpec,
    index: u64,
) -> twotier::Result<SirSamples> {
    let label = StreamLabel::root(&cfg.label).with(cfg.sweep.var.name(), index);
    let stream = derive_stream(cfg.seed, &label);
    let budget = TrialBudget::new(cfg.trials);
    match cfg.target {
        Target::Fap => {
            let t = match tag {
                TagSpec::Fixed(d) => TagDistance::Fixed(d),
                TagSpec::Averaged => TagDistance::Uniform,
            };
            simulate_mu_fap(params, t, cfg.channel, budget, &stream)
        }
        Target::Mbs => simulate_mu_mbs(params, cfg.channel, budget, &stream),
    }
}

fn fill_mc(row: &mut ResultRow, samples: &SirSamples, theta: f64) {
    match samples.outage(theta) {
        Ok(e) => {
            row.mc = Some(e.p_hat);
            row.mc_se = Some(e.std_err);
            row.n_conditioned = e.trials_conditioned;
        }
        Err(e) => row.notes.push(format!("mc: {e}")),
    }
}

fn bounds(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    tag: TagSpec,
) -> twotier::Result<BoundSet> {
    match (cfg.target, tag) {
        (Target::Fap, TagSpec::Fixed(d)) => fap_bounds(params.theta, d, params, cfg.phi),
        (Target::Fap, TagSpec::Averaged) => {
            fap_bounds_averaged(params.theta, params, cfg.phi, AVERAGING_NODES)
        }
        (Target::Mbs, _) => thm3_bounds(params.theta, params),
    }
}

fn fill_bounds(row: &mut ResultRow, b: twotier::Result<BoundSet>) {
    match b {
        Ok(b) => {
            row.lb = Some(b.lower);
            row.ub = Some(b.upper);
            row.q1 = b.get("q1");
            row.q2 = b.get("q2");
            row.gamma4 = b.get("gamma4");
            row.chi = b.get("chi");
            row.eps = b.get("eps");
        }
        Err(e) => row.notes.push(format!("bounds: {e}")),
    }
}

/// Runs every sweep point in order. Points where conditioning never
/// happens or a bound is undefined keep their row with `NA` cells.
pub fn run(cfg: &ExperimentConfig, what: Compute) -> Result<Vec<ResultRow>, String> {
    cfg.validate()?;
    let pts = points(cfg)?;
    let mut rows: Vec<ResultRow> = pts
        .iter()
        .map(|p| ResultRow {
            sweep_var: cfg.sweep.var.name(),
            value: p.value,
            ..Default::default()
        })
        .collect();
    if what.mc {
        if cfg.sweep.var == SweepVar::Theta {
            // every threshold reads the same SIR samples
            let s = simulate(cfg, &cfg.params, cfg.tag, 0).map_err(|e| e.to_string())?;
            for (row, p) in rows.iter_mut().zip(&pts) {
                fill_mc(row, &s, p.params.theta);
            }
        } else {
            for (i, (row, p)) in rows.iter_mut().zip(&pts).enumerate() {
                let s = simulate(cfg, &p.params, p.tag, i as u64).map_err(|e| e.to_string())?;
                fill_mc(row, &s, p.params.theta);
            }
        }
    }
    if what.bounds {
        for (row, p) in rows.iter_mut().zip(&pts) {
            fill_bounds(row, bounds(cfg, &p.params, p.tag));
        }
    }
    Ok(rows)
}
