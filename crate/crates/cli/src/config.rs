//! Flat `key = value` experiment configs.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors so a
//! typo never silently falls back to a default.

use std::fmt;
use std::path::{Path, PathBuf};
use twotier::bounds::PhiMode;
use twotier::channel::{ChannelModel, Hopping, InterferenceModel};
use twotier::NetworkParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// `path:line` for file entries, `--flag` for command-line overrides.
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepVar {
    NC,
    MuF,
    MuM,
    Kappa,
    DF,
    Theta,
}

impl SweepVar {
    pub const ALL: [SweepVar; 6] = [
        Self::NC,
        Self::MuF,
        Self::MuM,
        Self::Kappa,
        Self::DF,
        Self::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NC => "n_c",
            Self::MuF => "mu_f",
            Self::MuM => "mu_m",
            Self::Kappa => "kappa",
            Self::DF => "d_f",
            Self::Theta => "theta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

/// Which user the outage refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// An MU served by the tagged FAP.
    Fap,
    /// An MU served by the MBS.
    Mbs,
}

/// Placement of the tagged FAP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TagSpec {
    Fixed(f64),
    /// Averaged over the FAP's distance from the MBS.
    Averaged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: NetworkParams,
    pub sweep: Sweep,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub channel: ChannelModel,
    pub phi: PhiMode,
    pub tag: TagSpec,
    pub target: Target,
    /// Name mixed into the random streams, so distinct runs sharing a seed
    /// stay independent.
    pub label: String,
}

pub const MIN_TRIALS: u64 = 1000;
pub const DEFAULT_TRIALS: u64 = 100_000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = NetworkParams::default();
        Self {
            sweep: Sweep {
                var: SweepVar::Theta,
                values: vec![params.theta],
            },
            params,
            trials: DEFAULT_TRIALS,
            seed: 1,
            out: None,
            channel: ChannelModel::default(),
            phi: PhiMode::Exact,
            tag: TagSpec::Fixed(800.0),
            target: Target::Fap,
            label: "run".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("invalid value {v:?} for {key}"))
}

/// Comma-separated numbers; `a..b` expands to the integers `a..=b`.
pub fn parse_values(v: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = num("range start", a.trim())?;
            let b: i64 = num("range end", b.trim())?;
            if b < a {
                return Err(format!("empty range {part}"));
            }
            out.extend((a..=b).map(|i| i as f64));
        } else {
            out.push(num("values", part)?);
        }
    }
    if out.is_empty() {
        return Err("values must not be empty".into());
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Applies one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let p = &mut self.params;
        let (key, v) = (key.trim(), value.trim());
        match key {
            "radius" => p.radius = num(key, v)?,
            "lambda_f" => p.lambda_f = num(key, v)?,
            "mu_m" => p.mu_m = num(key, v)?,
            "mu_f" => p.mu_f = num(key, v)?,
            "r_f" => p.r_f = num(key, v)?,
            "ring_width" => p.ring_width = num(key, v)?,
            "alpha" => p.alpha = num(key, v)?,
            "kappa" => p.kappa = num(key, v)?,
            "kappa_o" => p.kappa_o = num(key, v)?,
            "n_c" => p.n_c = num(key, v)?,
            "n_s" => p.n_s = num(key, v)?,
            "n_h" => p.n_h = num(key, v)?,
            "eta" => p.eta = num(key, v)?,
            "theta" => p.theta = num(key, v)?,
            "sigma2" => p.sigma2 = num(key, v)?,
            "l0" => p.l0 = num(key, v)?,
            "grid_steps" => p.grid_steps = num(key, v)?,
            "grid_kappas" => p.grid_kappas = Some(parse_values(v)?),
            "sweep" => {
                self.sweep.var = SweepVar::parse(v).ok_or_else(|| {
                    let names: Vec<_> = SweepVar::ALL.iter().map(|s| s.name()).collect();
                    format!(
                        "unknown sweep variable {v:?}, expected one of {}",
                        names.join(", ")
                    )
                })?
            }
            "values" => self.sweep.values = parse_values(v)?,
            "trials" => self.trials = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "label" => self.label = v.to_string(),
            "mode" => {
                self.channel.interference = match v {
                    "full" => InterferenceModel::Full,
                    "simplified" => InterferenceModel::Simplified,
                    _ => return Err(format!("mode must be full or simplified, got {v:?}")),
                }
            }
            "hopping" => {
                self.channel.hopping = match v {
                    "averaged" => Hopping::Averaged,
                    "collision" => Hopping::Collision,
                    _ => return Err(format!("hopping must be averaged or collision, got {v:?}")),
                }
            }
            "phi" => {
                self.phi = match v {
                    "exact" => PhiMode::Exact,
                    "ub" => PhiMode::LemmaUpper,
                    _ => return Err(format!("phi must be exact or ub, got {v:?}")),
                }
            }
            "d_f" => {
                self.tag = match v {
                    "averaged" => TagSpec::Averaged,
                    _ => TagSpec::Fixed(num(key, v)?),
                }
            }
            "target" => {
                self.target = match v {
                    "fap" => Target::Fap,
                    "mbs" => Target::Mbs,
                    _ => return Err(format!("target must be fap or mbs, got {v:?}")),
                }
            }
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut sweep_line = None;
        for (i, raw) in text.lines().enumerate() {
            let location = format!("{origin}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
                location: location.clone(),
                message: format!("expected key = value, got {line:?}"),
            })?;
            if k.trim() == "sweep" {
                if let Some(prev) = &sweep_line {
                    return Err(ConfigError {
                        location,
                        message: format!("second sweep variable; the first is at {prev}"),
                    });
                }
                sweep_line = Some(location.clone());
            }
            cfg.set(k, v)
                .map_err(|message| ConfigError { location, message })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if self.sweep.values.is_empty() {
            return Err("sweep values must not be empty".into());
        }
        if self.trials < MIN_TRIALS {
            return Err(format!(
                "trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            ));
        }
        if let TagSpec::Fixed(d) = self.tag {
            if !(d > 0.0 && d < self.params.radius) {
                return Err(format!("d_f must lie in (0, radius), got {d}"));
            }
        }
        for &v in &self.sweep.values {
            let mut p = self.params.clone();
            let mut tag = self.tag;
            apply_sweep(&mut p, &mut tag, self.sweep.var, v)?;
            p.validate()
                .map_err(|e| format!("{} = {v}: {e}", self.sweep.var.name()))?;
        }
        Ok(())
    }
}

/// Writes one sweep value into the parameters.
pub fn apply_sweep(
    p: &mut NetworkParams,
    tag: &mut TagSpec,
    var: SweepVar,
    v: f64,
) -> Result<(), String> {
    match var {
        SweepVar::NC => {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(format!("n_c must be a non-negative integer, got {v}"));
            }
            p.n_c = v as u64;
        }
        SweepVar::MuF => p.mu_f = v,
        SweepVar::MuM => p.mu_m = v,
        SweepVar::Kappa => p.kappa = v,
        SweepVar::DF => {
            if !(v > 0.0 && v < p.radius) {
                return Err(format!("d_f must lie in (0, radius), got {v}"));
            }
            *tag = TagSpec::Fixed(v);
        }
        SweepVar::Theta => p.theta = v,
    }
    Ok(())
}
