use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use twotier_cli::config::ConfigError;
use twotier_cli::figures::write_figure;
use twotier_cli::validate::{all_pass, run_suite, SUITES};
use twotier_cli::{run, write_csv, Compute, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "twotier",
    version,
    about = "Uplink outage of MUs in a two-tier network with limited FAP backhaul"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Conditioned trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output CSV file, or directory for figures. Defaults to stdout / `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// full | simplified
    #[arg(long, global = true)]
    mode: Option<String>,
    /// exact | ub
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Run a figure preset instead of the configured sweep.
    #[arg(long, global = true)]
    figure: Option<u32>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo estimates only.
    Simulate,
    /// Analytic bounds only.
    Bounds,
    /// Simulation and bounds for one figure.
    Figure { n: u32 },
    /// Run a validation suite: lemma1, lemma2, appendixB or oracle.
    Validate { suite: String },
}

fn load(opts: &Opts) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &opts.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let flag = |name: &str, r: Result<(), String>| {
        r.map_err(|message| ConfigError {
            location: format!("--{name}"),
            message,
        })
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(t) = opts.trials {
        cfg.trials = t;
    }
    if let Some(o) = &opts.out {
        cfg.out = Some(o.clone());
    }
    if let Some(m) = &opts.mode {
        flag("mode", cfg.set("mode", m))?;
    }
    if let Some(p) = &opts.phi {
        flag("phi", cfg.set("phi", p))?;
    }
    if let Some(t) = opts.theta {
        cfg.params.theta = t;
        cfg.sweep.values = vec![t];
    }
    for kv in &opts.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError {
            location: "--set".into(),
            message: format!("expected KEY=VALUE, got {kv:?}"),
        })?;
        flag("set", cfg.set(k, v))?;
    }
    Ok(cfg)
}

fn figure(n: u32, cfg: &ExperimentConfig, what: Compute) -> Result<()> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let written = write_figure(n, cfg, what, &dir).map_err(|e| anyhow!(e))?;
    for (path, rows) in written {
        for r in &rows {
            for note in &r.notes {
                eprintln!("{}: {}={}: {note}", path.display(), r.sweep_var, r.value);
            }
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, what: Compute) -> Result<()> {
    let rows = run(cfg, what).map_err(|e| anyhow!(e))?;
    for r in &rows {
        for note in &r.notes {
            eprintln!("{}={}: {note}", r.sweep_var, r.value);
        }
    }
    match &cfg.out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(&rows, BufWriter::new(f))?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.opts.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.opts.threads)
            .build_global()?;
    }
    let cfg = match load(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: invalid config: {e}");
        std::process::exit(2);
    }
    match cli.cmd {
        Cmd::Simulate | Cmd::Bounds if cli.opts.figure.is_some() => {
            // figure presets always carry both the simulation and the bounds
            figure(cli.opts.figure.unwrap_or_default(), &cfg, Compute::BOTH)
        }
        Cmd::Simulate => sweep(
            &cfg,
            Compute {
                mc: true,
                bounds: false,
            },
        ),
        Cmd::Bounds => sweep(
            &cfg,
            Compute {
                mc: false,
                bounds: true,
            },
        ),
        Cmd::Figure { n } => figure(n, &cfg, Compute::BOTH),
        Cmd::Validate { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                bail!(
                    "unknown suite {suite:?}, expected one of {}",
                    SUITES.join(", ")
                );
            }
            let checks =
                run_suite(&suite, &cfg.params, cfg.trials, cfg.seed).map_err(|e| anyhow!(e))?;
            let mut out = io::stdout().lock();
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            let ok = all_pass(&checks);
            writeln!(out, "{} {suite}", if ok { "PASS" } else { "FAIL" })?;
            if !ok {
                std::process::exit(1);
            }
            Ok(())
        }
    }
}
