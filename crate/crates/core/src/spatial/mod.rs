//! Planar point processes and geometry.
//!
//! Everything lives in a square window `[-half_side, half_side]^2`. Nodes
//! closer than `guard_margin` to the window edge are sampled and take part
//! in graph construction, but are excluded from statistics because their
//! neighbourhood is truncated.

mod index;
mod voronoi;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use index::SpatialIndex;
pub use voronoi::{sample_typical_voronoi_area, CellAreaSample, VoronoiSampler};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Bearing of `target` seen from `self`, in `(-pi, pi]`.
    #[inline]
    pub fn bearing_to(self, target: Point2) -> f64 {
        (target.y - self.y).atan2(target.x - self.x)
    }
}

/// Square observation window centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    half_side: f64,
    guard_margin: f64,
}

impl Window {
    pub fn new(half_side: f64, guard_margin: f64) -> Result<Self> {
        let ok = half_side.is_finite()
            && half_side > 0.0
            && guard_margin.is_finite()
            && guard_margin >= 0.0
            && guard_margin < half_side;
        if !ok {
            return Err(Error::InvalidWindow {
                half_side,
                guard_margin,
            });
        }
        Ok(Self {
            half_side,
            guard_margin,
        })
    }

    /// Guard margin for which a node's nearest eavesdropper (of effective
    /// density `lambda_e`) lies beyond the margin with probability below
    /// `1e-3`.
    pub fn default_guard_margin(lambda_e: f64) -> f64 {
        (1000f64.ln() / (PI * lambda_e)).sqrt()
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn guard_margin(&self) -> f64 {
        self.guard_margin
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn area(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x.abs() <= self.half_side && p.y.abs() <= self.half_side
    }

    /// Distance from `p` to the nearest window edge (negative outside).
    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.half_side - p.x.abs().max(p.y.abs())
    }

    /// True when `p` lies in the interior sub-square used for statistics.
    pub fn is_interior(&self, p: Point2) -> bool {
        self.distance_to_boundary(p) >= self.guard_margin
    }

    /// True when `p` lies in the boundary annulus of width `guard_margin`.
    pub fn in_annulus(&self, p: Point2) -> bool {
        self.distance_to_boundary(p) < self.guard_margin
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let h = self.half_side;
        Point2::new(rng.random_range(-h..h), rng.random_range(-h..h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Legitimate,
    Eavesdropper,
}

/// A realisation of a homogeneous Poisson process restricted to a window.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: Vec<Point2>,
    pub density: f64,
    pub window: Window,
    pub kind: PointKind,
}

impl PointSet {
    pub fn new(points: Vec<Point2>, density: f64, window: Window, kind: PointKind) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::NegativeDensity(density));
        }
        if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
            return Err(Error::invalid(format!(
                "point ({}, {}) lies outside the window",
                p.x, p.y
            )));
        }
        Ok(Self {
            points,
            density,
            window,
            kind,
        })
    }

    pub fn empty(window: Window, kind: PointKind) -> Self {
        Self {
            points: Vec::new(),
            density: 0.0,
            window,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Insert a probe node at the origin as point 0 (Palm conditioning).
    pub fn with_probe(mut self) -> Self {
        self.points.insert(0, Point2::ORIGIN);
        self
    }

    pub fn index(&self) -> SpatialIndex<'_> {
        SpatialIndex::for_point_set(self)
    }
}

/// Sample a homogeneous Poisson process of the given density on `window`.
pub fn sample_poisson<R: Rng + ?Sized>(
    density: f64,
    window: Window,
    kind: PointKind,
    rng: &mut R,
) -> Result<PointSet> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::NegativeDensity(density));
    }
    let mean = density * window.area();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::invalid(format!("poisson mean {mean}: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let points = (0..count).map(|_| window.sample_uniform(rng)).collect();
    Ok(PointSet {
        points,
        density,
        window,
        kind,
    })
}

/// Seeded convenience wrapper around [`sample_poisson`].
pub fn sample_poisson_seeded(
    density: f64,
    window: Window,
    kind: PointKind,
    seed: u64,
) -> Result<PointSet> {
    let mut rng = crate::seed::rng(seed, &[]);
    sample_poisson(density, window, kind, &mut rng)
}

/// Which of `sectors` equal angular sectors of `origin` contains `target`.
///
/// Sector `l` (1-based) spans bearings `(offset + (l-1) w, offset + l w)`
/// with `w = 2 pi / sectors`. A bearing exactly on a boundary goes to the
/// lower-numbered sector.
pub fn sector_of(origin: Point2, offset: f64, sectors: usize, target: Point2) -> Result<usize> {
    if sectors == 0 {
        return Err(Error::invalid("number of sectors must be at least 1"));
    }
    if origin == target {
        return Err(Error::DegenerateDirection);
    }
    if sectors == 1 {
        return Ok(1);
    }
    Ok(sector_from_bearing(origin.bearing_to(target), offset, sectors))
}

#[inline]
pub(crate) fn sector_from_bearing(bearing: f64, offset: f64, sectors: usize) -> usize {
    let rel = (bearing - offset).rem_euclid(TAU);
    let width = TAU / sectors as f64;
    let s = (rel / width).ceil() as usize;
    s.clamp(1, sectors)
}

/// Eavesdroppers that survive neutralisation: those farther than `rho`
/// from every legitimate node.
pub fn neutralize(eves: &PointSet, legit: &PointSet, rho: f64) -> Result<PointSet> {
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("neutralisation radius {rho} < 0")));
    }
    if legit.is_empty() {
        return Ok(eves.clone());
    }
    let index = legit.index();
    let points = eves
        .points
        .iter()
        .copied()
        .filter(|&e| index.find_within(e, rho * rho, true, None).is_none())
        .collect();
    Ok(PointSet {
        points,
        density: eves.density,
        window: eves.window,
        kind: eves.kind,
    })
}
