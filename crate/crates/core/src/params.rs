use crate::error::{domain, Result};
use crate::geometry::{apollonius_factor, PartitionGrid};
use std::f64::consts::PI;

/// Scalars describing one two-tier deployment. Lengths in meters,
/// densities per square meter.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    /// Macro cell radius `R`.
    pub radius: f64,
    pub lambda_f: f64,
    pub mu_m: f64,
    pub mu_f: f64,
    /// Inner radius of the FU annulus around each FAP.
    pub r_f: f64,
    /// Width of the FU annulus.
    pub ring_width: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub kappa_o: f64,
    /// Users (FUs + admitted MUs) one FAP can carry.
    pub n_c: u64,
    pub n_s: u64,
    pub n_h: u64,
    /// Received power ratio `p_f / p_m`.
    pub eta: f64,
    /// SIR threshold.
    pub theta: f64,
    /// Mean fading power gain.
    pub sigma2: f64,
    /// Path loss at unit distance. Cancels under power control; kept only so
    /// configs that set it are accepted.
    pub l0: f64,
    /// Number of steps `t` of the default geometric ratio grid.
    pub grid_steps: usize,
    /// Explicit grid `kappa_0..kappa_t`, overriding `grid_steps`.
    pub grid_kappas: Option<Vec<f64>>,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            radius: 1000.0,
            lambda_f: 5e-6,
            mu_m: 40e-6,
            mu_f: 5e-3,
            r_f: 10.0,
            ring_width: 5.0,
            alpha: 4.0,
            kappa: 0.08,
            kappa_o: 0.008,
            n_c: 3,
            n_s: 32,
            n_h: 1024,
            eta: 40.0,
            theta: 2.0,
            sigma2: 1.0,
            l0: 1.0,
            grid_steps: 8,
            grid_kappas: None,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let op = "NetworkParams";
        if !(self.radius > 0.0) {
            return domain(op, "radius must be positive");
        }
        for (name, v) in [
            ("lambda_f", self.lambda_f),
            ("mu_m", self.mu_m),
            ("mu_f", self.mu_f),
            ("r_f", self.r_f),
            ("ring_width", self.ring_width),
            ("theta", self.theta),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return domain(
                    op,
                    format!("{name} must be finite and non-negative, got {v}"),
                );
            }
        }
        if !(self.alpha > 2.0) {
            return domain(op, format!("alpha must exceed 2, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.kappa) {
            return domain(op, format!("kappa must lie in [0, 1), got {}", self.kappa));
        }
        if !(self.kappa_o >= 0.0 && self.kappa_o <= self.kappa) {
            return domain(
                op,
                format!("kappa_o must lie in [0, kappa], got {}", self.kappa_o),
            );
        }
        if self.n_s == 0 || self.n_h == 0 {
            return domain(op, "n_s and n_h must be at least 1");
        }
        if !(self.eta > 0.0) || !(self.sigma2 > 0.0) {
            return domain(op, "eta and sigma2 must be positive");
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<PartitionGrid> {
        match &self.grid_kappas {
            Some(k) => {
                let g = PartitionGrid::new(k.clone())?;
                if g.kappa0() != self.kappa {
                    return domain("NetworkParams", "grid must start at kappa");
                }
                Ok(g)
            }
            None => PartitionGrid::geometric(self.kappa, self.grid_steps),
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Expected MU count `pi R^2 mu_m`.
    pub fn nbar_mu(&self) -> f64 {
        self.area() * self.mu_m
    }

    /// Expected FAP count `pi R^2 lambda_f`.
    pub fn nbar_fap(&self) -> f64 {
        self.area() * self.lambda_f
    }

    /// Expected FU count per FAP.
    pub fn nbar_fu(&self) -> f64 {
        let outer = self.r_f + self.ring_width;
        PI * (outer * outer - self.r_f * self.r_f) * self.mu_f
    }

    /// `kappa / (1 - kappa^2)`.
    pub fn coverage_factor(&self) -> f64 {
        apollonius_factor(self.kappa)
    }

    /// `kappa_o / (1 - kappa_o^2)`.
    pub fn exclusion_factor(&self) -> f64 {
        apollonius_factor(self.kappa_o)
    }

    /// Total bandwidth attenuation `n_s * n_h` applied to every interferer.
    pub fn hopping_gain(&self) -> f64 {
        (self.n_s * self.n_h) as f64
    }

    pub fn p_m(&self) -> f64 {
        1.0
    }

    pub fn p_f(&self) -> f64 {
        self.eta
    }
}
