//! Preset sweeps for each outage figure, and a plain-text plot script that
//! lists which CSV columns make up each curve.

use crate::config::{ExperimentConfig, Sweep, SweepVar, TagSpec, Target};
use crate::experiment::{run, write_csv, Compute, ResultRow};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Stand-in for an unlimited backhaul.
pub const UNCONSTRAINED_NC: u64 = 1_000_000;

pub const FIGURES: [u32; 6] = [3, 4, 5, 6, 7, 8];

#[derive(Clone, Debug)]
pub struct Panel {
    /// File stem of the CSV, also the stream label.
    pub stem: String,
    pub title: String,
    pub config: ExperimentConfig,
}

fn nc_values() -> Vec<f64> {
    (1..=15).map(f64::from).collect()
}

fn d_values(radius: f64) -> Vec<f64> {
    (1..=19).map(|i| radius * 0.05 * f64::from(i)).collect()
}

fn panel(
    base: &ExperimentConfig,
    stem: String,
    title: String,
    edit: impl FnOnce(&mut ExperimentConfig),
) -> Panel {
    let mut config = base.clone();
    config.label = stem.clone();
    edit(&mut config);
    Panel {
        stem,
        title,
        config,
    }
}

/// The panels of figure `n`, inheriting params, trials, seed and modes
/// from `base`.
pub fn panels(n: u32, base: &ExperimentConfig) -> Result<Vec<Panel>, String> {
    let nc_sweep = {
        let mut v = nc_values();
        v.push(UNCONSTRAINED_NC as f64);
        Sweep {
            var: SweepVar::NC,
            values: v,
        }
    };
    let r = base.params.radius;
    let out = match n {
        3 => vec![panel(
            base,
            "fig3".into(),
            "FAP-served MU vs n_c, d_f = 800".into(),
            |c| {
                c.sweep = nc_sweep.clone();
                c.tag = TagSpec::Fixed(800.0);
                c.target = Target::Fap;
            },
        )],
        4 => [2.5e-3, 5e-3, 1e-2]
            .iter()
            .map(|&mu_f| {
                panel(
                    base,
                    format!("fig4_mu_f={mu_f}"),
                    format!("FAP-served MU vs n_c, mu_f = {mu_f}"),
                    |c| {
                        c.params.mu_f = mu_f;
                        c.sweep = nc_sweep.clone();
                        c.tag = TagSpec::Fixed(800.0);
                        c.target = Target::Fap;
                    },
                )
            })
            .collect(),
        5 => [20e-6, 40e-6]
            .iter()
            .flat_map(|&mu_m| {
                [
                    ("a", Target::Fap, "FAP-served"),
                    ("b", Target::Mbs, "MBS-served"),
                ]
                .map(|(p, target, who)| {
                    panel(
                        base,
                        format!("fig5{p}_mu_m={mu_m}"),
                        format!("{who} MU vs n_c, mu_m = {mu_m}"),
                        |c| {
                            c.params.mu_m = mu_m;
                            c.sweep = Sweep {
                                var: SweepVar::NC,
                                values: nc_values(),
                            };
                            c.tag = TagSpec::Averaged;
                            c.target = target;
                        },
                    )
                })
            })
            .collect(),
        6 => [3, UNCONSTRAINED_NC]
            .iter()
            .flat_map(|&n_c| {
                [
                    ("a", Target::Fap, "FAP-served"),
                    ("b", Target::Mbs, "MBS-served"),
                ]
                .map(|(p, target, who)| {
                    panel(
                        base,
                        format!("fig6{p}_n_c={n_c}"),
                        format!("{who} MU vs kappa, n_c = {n_c}"),
                        |c| {
                            c.params.n_c = n_c;
                            c.sweep = Sweep {
                                var: SweepVar::Kappa,
                                values: (1..=10).map(|i| 0.02 * f64::from(i)).collect(),
                            };
                            c.tag = TagSpec::Averaged;
                            c.target = target;
                        },
                    )
                })
            })
            .collect(),
        7 => [3, UNCONSTRAINED_NC]
            .iter()
            .map(|&n_c| {
                panel(
                    base,
                    format!("fig7_n_c={n_c}"),
                    format!("FAP-served MU vs d_f, n_c = {n_c}"),
                    |c| {
                        c.params.n_c = n_c;
                        c.sweep = Sweep {
                            var: SweepVar::DF,
                            values: d_values(r),
                        };
                        c.target = Target::Fap;
                    },
                )
            })
            .collect(),
        8 => [20e-6, 40e-6, 80e-6]
            .iter()
            .map(|&mu_m| {
                panel(
                    base,
                    format!("fig8_mu_m={mu_m}"),
                    format!("FAP-served MU vs d_f, mu_m = {mu_m}"),
                    |c| {
                        c.params.mu_m = mu_m;
                        c.params.n_c = 3;
                        c.sweep = Sweep {
                            var: SweepVar::DF,
                            values: d_values(r),
                        };
                        c.target = Target::Fap;
                    },
                )
            })
            .collect(),
        _ => return Err(format!("no figure {n}; choose one of 3..8")),
    };
    Ok(out)
}

/// Renderer-agnostic plot commands for the given CSV files.
pub fn plot_script(n: u32, panels: &[Panel], radius: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# figure {n}; columns as in the CSV header");
    for p in panels {
        let var = p.config.sweep.var;
        let _ = writeln!(s, "\npanel \"{}\"", p.title);
        let _ = writeln!(s, "data {}.csv", p.stem);
        match var {
            SweepVar::DF => {
                let _ = writeln!(s, "x value scale {} label \"d_f / R\"", 1.0 / radius);
            }
            _ => {
                let _ = writeln!(s, "x value label \"{}\"", var.name());
            }
        }
        if var == SweepVar::NC {
            let _ = writeln!(
                s,
                "exclude value >= {UNCONSTRAINED_NC} as hline \"no backhaul limit\""
            );
        }
        let _ = writeln!(s, "points mc error mc_se label \"simulation\"");
        let _ = writeln!(s, "line ub label \"upper bound\"");
        let _ = writeln!(s, "line lb label \"lower bound\"");
        let _ = writeln!(s, "y label \"outage probability\" log");
    }
    s
}

/// Runs every panel of figure `n` and writes `<stem>.csv` per panel plus
/// `fig<n>.plot` into `dir`.
pub fn write_figure(
    n: u32,
    base: &ExperimentConfig,
    what: Compute,
    dir: &Path,
) -> Result<Vec<(PathBuf, Vec<ResultRow>)>, String> {
    let ps = panels(n, base)?;
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut written = Vec::new();
    for p in &ps {
        let rows = run(&p.config, what).map_err(|e| format!("{}: {e}", p.stem))?;
        let path = dir.join(format!("{}.csv", p.stem));
        let f = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_csv(&rows, std::io::BufWriter::new(f))
            .map_err(|e| format!("{}: {e}", path.display()))?;
        written.push((path, rows));
    }
    let plot = dir.join(format!("fig{n}.plot"));
    fs::write(&plot, plot_script(n, &ps, base.params.radius))
        .map_err(|e| format!("{}: {e}", plot.display()))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_has_valid_panels() {
        let base = ExperimentConfig::default();
        for n in FIGURES {
            let ps = panels(n, &base).unwrap();
            assert!(!ps.is_empty());
            for p in &ps {
                p.config
                    .validate()
                    .unwrap_or_else(|e| panic!("{}: {e}", p.stem));
            }
        }
        assert!(panels(9, &base).is_err());
    }

    #[test]
    fn figure3_sweeps_backhaul_with_reference() {
        let ps = panels(3, &ExperimentConfig::default()).unwrap();
        let v = &ps[0].config.sweep.values;
        assert_eq!(v.len(), 16);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[14], 15.0);
        assert_eq!(v[15], UNCONSTRAINED_NC as f64);
        assert_eq!(ps[0].config.tag, TagSpec::Fixed(800.0));
    }

    #[test]
    fn plot_script_references_each_csv() {
        let base = ExperimentConfig::default();
        let ps = panels(6, &base).unwrap();
        let s = plot_script(6, &ps, 1000.0);
        for p in &ps {
            assert!(s.contains(&format!("data {}.csv", p.stem)));
        }
    }
}
