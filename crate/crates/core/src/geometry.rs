//! Apollonius coverage/exclusion circles, distance ratios and the
//! distance-ratio partition of the macro disk.
//!
//! Coordinates are centered on the MBS.

use crate::error::{domain, Error, Result};
use crate::math::adaptive_simpson;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, angle: f64) -> Self {
        Self {
            x: r * angle.cos(),
            y: r * angle.sin(),
        }
    }

    /// Distance to the MBS.
    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            x: self.x * k,
            y: self.y * k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, p: Point) -> bool {
        p.dist_sq(self.center) <= self.radius * self.radius
    }
}

/// `k / (1 - k^2)`, the radius-to-distance factor of an Apollonius circle.
pub fn apollonius_factor(k: f64) -> f64 {
    k / (1.0 - k * k)
}

/// Locus `d(u, fap) <= ratio * d(u, mbs)` for `0 <= ratio < 1`.
fn apollonius_disk(op: &'static str, fap: Point, ratio: f64) -> Result<Disk> {
    if !(0.0..1.0).contains(&ratio) {
        return domain(op, format!("ratio must lie in [0, 1), got {ratio}"));
    }
    let s = 1.0 - ratio * ratio;
    Ok(Disk {
        center: fap.scale(1.0 / s),
        radius: ratio * fap.norm() / s,
    })
}

/// Region in which an MU may be admitted by the FAP at `fap` under access
/// parameter `kappa`.
pub fn coverage_disk(fap: Point, kappa: f64) -> Result<Disk> {
    apollonius_disk("coverage_disk", fap, kappa)
}

/// Region around the FAP at `fap` where no MU may be located.
pub fn exclusion_disk(fap: Point, kappa_o: f64) -> Result<Disk> {
    apollonius_disk("exclusion_disk", fap, kappa_o)
}

/// `d(u, mbs) / d(u, fap)`.
pub fn delta_ratio(u: Point, fap: Point) -> Result<f64> {
    let den = u.dist(fap);
    if den == 0.0 {
        return Err(Error::InfiniteRatio);
    }
    Ok(u.norm() / den)
}

/// Increasing ratio grid `kappa_0 = kappa < kappa_1 < ... < kappa_t = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionGrid {
    kappas: Vec<f64>,
}

/// A cell of the partition. `Minus(i)` is `kappa_{i-1} < delta <= kappa_i`,
/// `Plus(i)` is `1/kappa_i < delta <= 1/kappa_{i-1}`, `Zero` is
/// `delta <= kappa_0`. Indices run `1..=t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Zero,
    Minus(usize),
    Plus(usize),
}

impl PartitionGrid {
    pub fn new(kappas: Vec<f64>) -> Result<Self> {
        if kappas.len() < 2 {
            return domain("PartitionGrid", "need at least kappa_0 and kappa_t = 1");
        }
        if kappas[0] < 0.0 || *kappas.last().unwrap() != 1.0 {
            return domain(
                "PartitionGrid",
                "grid must start at kappa >= 0 and end at 1",
            );
        }
        if kappas.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("PartitionGrid", "grid must be strictly increasing");
        }
        Ok(Self { kappas })
    }

    /// `t` steps between `kappa` and 1: geometric when `kappa > 0`, linear
    /// otherwise.
    pub fn geometric(kappa: f64, t: usize) -> Result<Self> {
        if t == 0 {
            return domain("PartitionGrid::geometric", "t must be at least 1");
        }
        if !(0.0..1.0).contains(&kappa) {
            return domain(
                "PartitionGrid::geometric",
                format!("kappa must lie in [0, 1), got {kappa}"),
            );
        }
        let mut kappas: Vec<f64> = (0..=t)
            .map(|i| {
                let f = i as f64 / t as f64;
                if kappa > 0.0 {
                    kappa.powf(1.0 - f)
                } else {
                    f
                }
            })
            .collect();
        kappas[0] = kappa;
        kappas[t] = 1.0;
        Self::new(kappas)
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn kappa0(&self) -> f64 {
        self.kappas[0]
    }

    pub fn t(&self) -> usize {
        self.kappas.len() - 1
    }

    pub fn region(&self, delta: f64) -> Result<Region> {
        let k = &self.kappas;
        let t = self.t();
        if delta.is_nan() || delta < 0.0 {
            return domain(
                "quantize_delta",
                format!("ratio must be non-negative, got {delta}"),
            );
        }
        if delta <= k[0] {
            return Ok(Region::Zero);
        }
        if delta <= 1.0 {
            // first i with delta <= kappa_i
            let i = k.partition_point(|&ki| ki < delta);
            return Ok(Region::Minus(i));
        }
        let limit = 1.0 / k[0];
        if delta > limit {
            return Err(Error::OutOfRange { delta, limit });
        }
        // delta in (1/kappa_i, 1/kappa_{i-1}]: largest i with 1/kappa_i < delta
        for i in (1..=t).rev() {
            if 1.0 / k[i - 1] >= delta && 1.0 / k[i] < delta {
                return Ok(Region::Plus(i));
            }
        }
        // delta == 1/kappa_0 exactly lands in Plus(1) above; reaching here is
        // only possible through rounding at a grid boundary
        Ok(Region::Plus(1))
    }

    /// `(lower, upper)` grid values bracketing `delta`.
    pub fn bracket(&self, region: Region) -> (f64, f64) {
        let k = &self.kappas;
        match region {
            Region::Zero => (0.0, k[0]),
            Region::Minus(i) => (k[i - 1], k[i]),
            Region::Plus(i) => (1.0 / k[i], 1.0 / k[i - 1]),
        }
    }
}

/// Quantizes `delta` onto the grid, returning `(delta_lb, delta_ub)`.
pub fn quantize_delta(delta: f64, grid: &PartitionGrid) -> Result<(f64, f64)> {
    Ok(grid.bracket(grid.region(delta)?))
}

/// Probability mass of each partition cell for a point uniform on the macro
/// disk outside the tagged FAP's coverage disk.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionProbs {
    pub kappas: Vec<f64>,
    pub p0: f64,
    /// `p_plus[i - 1]` holds `p_i`.
    pub p_plus: Vec<f64>,
    /// `p_minus[i - 1]` holds `p_{-i}`.
    pub p_minus: Vec<f64>,
}

impl PartitionProbs {
    pub fn total(&self) -> f64 {
        self.p0 + self.p_plus.iter().sum::<f64>() + self.p_minus.iter().sum::<f64>()
    }

    pub fn get(&self, region: Region) -> f64 {
        match region {
            Region::Zero => self.p0,
            Region::Minus(i) => self.p_minus[i - 1],
            Region::Plus(i) => self.p_plus[i - 1],
        }
    }

    pub fn t(&self) -> usize {
        self.p_plus.len()
    }
}

/// Fraction of the circle of radius `r` around the MBS on which
/// `delta <= c`, with the FAP at distance `d`.
fn angular_fraction(r: f64, d: f64, c: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    // delta <= c  <=>  cos(phi) <= (c^2 (r^2 + d^2) - r^2) / (2 r d c^2)
    let c2 = c * c;
    let a = (c2 * (r * r + d * d) - r * r) / (2.0 * r * d * c2);
    if a >= 1.0 {
        1.0
    } else if a <= -1.0 {
        0.0
    } else {
        1.0 - a.acos() / PI
    }
}

/// `P(delta(u) <= c)` for `u` uniform on the disk of radius `radius`.
fn ratio_cdf(d: f64, c: f64, radius: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    // radial extent of the level curve delta = c
    let mut breaks = vec![c * d / (1.0 + c)];
    if (c - 1.0).abs() > 1e-15 {
        breaks.push(c * d / (1.0 - c).abs());
    }
    breaks.retain(|&b| b > 0.0 && b < radius);
    breaks.push(radius);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let f = |r: f64| 2.0 * r / (radius * radius) * angular_fraction(r, d, c);
    let mut lo = 0.0;
    let mut total = 0.0;
    for b in breaks {
        total += adaptive_simpson(&f, lo, b, 1e-13);
        lo = b;
    }
    total
}

/// Cell probabilities for MUs outside the coverage disk of a FAP at
/// distance `d` from the MBS, by polar quadrature of the ratio level sets.
pub fn partition_probs(d: f64, grid: &PartitionGrid, radius: f64) -> Result<PartitionProbs> {
    if !(d >= 0.0) || d >= radius {
        return domain(
            "partition_probs",
            format!("need 0 <= d < R, got d={d}, R={radius}"),
        );
    }
    let k = grid.kappas();
    let t = grid.t();
    if d == 0.0 {
        // delta == 1 everywhere except the FAP itself
        let mut p_minus = vec![0.0; t];
        p_minus[t - 1] = 1.0;
        return Ok(PartitionProbs {
            kappas: k.to_vec(),
            p0: 0.0,
            p_plus: vec![0.0; t],
            p_minus,
        });
    }
    let low: Vec<f64> = k.iter().map(|&ki| ratio_cdf(d, ki, radius)).collect();
    let high: Vec<f64> = k
        .iter()
        .map(|&ki| {
            if ki > 0.0 {
                ratio_cdf(d, 1.0 / ki, radius)
            } else {
                1.0
            }
        })
        .collect();
    let total = high[0];
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "coverage disk covers the macro cell".into(),
        ));
    }
    let p0 = low[0] / total;
    let p_minus = (1..=t)
        .map(|i| ((low[i] - low[i - 1]) / total).max(0.0))
        .collect();
    let p_plus = (1..=t)
        .map(|i| ((high[i - 1] - high[i]) / total).max(0.0))
        .collect();
    Ok(PartitionProbs {
        kappas: k.to_vec(),
        p0,
        p_plus,
        p_minus,
    })
}
