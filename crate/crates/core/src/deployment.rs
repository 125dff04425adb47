//! Sampling of network realizations: the FAP process, the MU process thinned
//! by the exclusion rule, and the FU annulus process around every FAP.
//!
//! When a tagged FAP is requested it is superposed on the FAP process at the
//! requested distance. MUs are then drawn in two independent pieces, inside
//! and outside the tagged coverage disk, whose union is a PPP on the macro
//! disk. The inside piece is drawn first so estimators can reject a trial
//! before paying for the rest of the deployment.

use crate::error::{domain, Result};
use crate::geometry::{coverage_disk, Disk, Point};
use crate::params::NetworkParams;
use crate::rng::{Lane, RngStream, SimRng};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::TAU;
use std::io::{self, Write};

/// One sampled deployment. When present, the tagged FAP is index 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Realization {
    pub faps: Vec<Point>,
    pub tagged_fap: Option<usize>,
    pub mus: Vec<Point>,
    /// `fus[i]` are the femto users of `faps[i]`.
    pub fus: Vec<Vec<Point>>,
}

impl Realization {
    /// One row per node: `kind,fap_index,x,y` (MU rows leave the index empty).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "kind,fap_index,x,y")?;
        for (i, a) in self.faps.iter().enumerate() {
            writeln!(w, "fap,{i},{},{}", a.x, a.y)?;
        }
        for u in &self.mus {
            writeln!(w, "mu,,{},{}", u.x, u.y)?;
        }
        for (i, fus) in self.fus.iter().enumerate() {
            for u in fus {
                writeln!(w, "fu,{i},{},{}", u.x, u.y)?;
            }
        }
        Ok(())
    }

    /// True when some MU violates the exclusion floor of some FAP.
    pub fn violates_exclusion(&self, kappa_o: f64) -> bool {
        self.mus.iter().any(|&u| excluded(u, &self.faps, kappa_o))
    }
}

pub(crate) fn poisson_count(mean: f64, rng: &mut SimRng) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean)
        .map(|p| p.sample(rng) as usize)
        .unwrap_or(0)
}

fn uniform_in_disk(center: Point, radius: f64, rng: &mut SimRng) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = TAU * rng.random::<f64>();
    Point::new(center.x + r * phi.cos(), center.y + r * phi.sin())
}

fn uniform_in_annulus(center: Point, inner: f64, outer: f64, rng: &mut SimRng) -> Point {
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let phi = TAU * rng.random::<f64>();
    Point::new(center.x + r * phi.cos(), center.y + r * phi.sin())
}

/// PPP of the given density on the disk of radius `radius` around the MBS.
pub fn sample_ppp_disk(density: f64, radius: f64, rng: &mut SimRng) -> Vec<Point> {
    let n = poisson_count(density * std::f64::consts::PI * radius * radius, rng);
    (0..n)
        .map(|_| uniform_in_disk(Point::ORIGIN, radius, rng))
        .collect()
}

fn sample_fus(params: &NetworkParams, fap: Point, rng: &mut SimRng) -> Vec<Point> {
    let n = poisson_count(params.nbar_fu(), rng);
    let outer = params.r_f + params.ring_width;
    (0..n)
        .map(|_| uniform_in_annulus(fap, params.r_f, outer, rng))
        .collect()
}

/// `d(u, a) < kappa_o * d(u, mbs)` for some FAP `a`.
#[inline]
fn excluded(u: Point, faps: &[Point], kappa_o: f64) -> bool {
    if kappa_o == 0.0 {
        return false;
    }
    let lim = kappa_o * kappa_o * u.norm_sq();
    faps.iter().any(|&a| u.dist_sq(a) < lim)
}

/// The part of a realization that decides whether the tagged FAP can serve
/// anyone: its position, its FUs and the raw MUs inside its coverage disk.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedCell {
    pub position: Point,
    pub coverage: Disk,
    pub fus: Vec<Point>,
    /// MUs inside the coverage disk and the macro disk, already thinned by
    /// the tagged FAP's own exclusion disk.
    pub inner_mus: Vec<Point>,
}

impl TaggedCell {
    /// False when the tagged FAP certainly serves no MU in this realization.
    pub fn may_serve(&self, n_c: u64) -> bool {
        (self.fus.len() as u64) < n_c && !self.inner_mus.is_empty()
    }
}

pub fn sample_tagged_cell(
    params: &NetworkParams,
    d_tag: f64,
    stream: &RngStream,
) -> Result<TaggedCell> {
    if !(d_tag >= 0.0) || d_tag >= params.radius {
        return domain(
            "sample_realization",
            format!("tag distance must lie in [0, R), got {d_tag}"),
        );
    }
    let mut rng = stream.lane(Lane::TagPosition).rng();
    let position = Point::polar(d_tag, TAU * rng.random::<f64>());
    let coverage = coverage_disk(position, params.kappa)?;
    let fus = sample_fus(params, position, &mut stream.lane(Lane::TagFus).rng());

    let mut rng = stream.lane(Lane::InnerMus).rng();
    let n = poisson_count(
        params.mu_m * std::f64::consts::PI * coverage.radius * coverage.radius,
        &mut rng,
    );
    let r2 = params.radius * params.radius;
    let one = [position];
    let inner_mus = (0..n)
        .map(|_| uniform_in_disk(coverage.center, coverage.radius, &mut rng))
        .filter(|u| u.norm_sq() <= r2 && !excluded(*u, &one, params.kappa_o))
        .collect();
    Ok(TaggedCell {
        position,
        coverage,
        fus,
        inner_mus,
    })
}

/// Samples everything not already fixed by `tagged`.
pub fn complete_realization(
    params: &NetworkParams,
    tagged: Option<TaggedCell>,
    stream: &RngStream,
) -> Realization {
    let mut faps = Vec::new();
    let mut fus = Vec::new();
    let mut mus = Vec::new();
    let tag_disk = tagged.as_ref().map(|t| t.coverage);
    if let Some(t) = tagged {
        faps.push(t.position);
        fus.push(t.fus);
        mus = t.inner_mus;
    }
    let tagged_fap = tag_disk.map(|_| 0);
    faps.extend(sample_ppp_disk(
        params.lambda_f,
        params.radius,
        &mut stream.lane(Lane::Faps).rng(),
    ));

    mus.retain(|&u| !excluded(u, &faps, params.kappa_o));
    let outer = sample_ppp_disk(
        params.mu_m,
        params.radius,
        &mut stream.lane(Lane::OuterMus).rng(),
    );
    mus.extend(outer.into_iter().filter(|&u| {
        !tag_disk.is_some_and(|disk| disk.contains(u)) && !excluded(u, &faps, params.kappa_o)
    }));

    let mut rng = stream.lane(Lane::Fus).rng();
    for &a in &faps[fus.len()..] {
        fus.push(sample_fus(params, a, &mut rng));
    }
    Realization {
        faps,
        tagged_fap,
        mus,
        fus,
    }
}

/// Samples one full realization, optionally with a tagged FAP at distance
/// `d_tag` in a uniformly random direction.
pub fn sample_realization(
    params: &NetworkParams,
    d_tag: Option<f64>,
    stream: &RngStream,
) -> Result<Realization> {
    let tagged = d_tag
        .map(|d| sample_tagged_cell(params, d, stream))
        .transpose()?;
    Ok(complete_realization(params, tagged, stream))
}
