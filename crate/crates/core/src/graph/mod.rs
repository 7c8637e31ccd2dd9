//! Construction of the secure-link digraph.
//!
//! Every builder returns an [`ISGraph`] over the legitimate nodes. Edge
//! predicates use strict inequalities throughout.

mod components;
mod dump;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_fading, ChannelParams, GainKind};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::seed::{mix, PairStream};
use crate::spatial::{neutralize, sector_from_bearing, Point2, PointSet};
use crate::{Error, Result};

pub use components::{
    component, degrees, reaches, strong_projection, weak_projection, ComponentKind, UndirectedGraph,
};
pub use dump::{read_dump, write_dump};

/// Directed graph over legitimate nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ISGraph {
    positions: Vec<Point2>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

impl ISGraph {
    /// Build from per-node out-neighbour lists. Lists are sorted and the
    /// in-adjacency is derived as their transpose.
    pub fn from_out_lists(positions: Vec<Point2>, mut out_adj: Vec<Vec<u32>>) -> Result<Self> {
        let n = positions.len();
        if out_adj.len() != n {
            return Err(Error::invalid(format!(
                "{} adjacency lists for {n} nodes",
                out_adj.len()
            )));
        }
        let mut in_adj = vec![Vec::new(); n];
        for (i, list) in out_adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &j in list.iter() {
                if j as usize >= n {
                    return Err(Error::invalid(format!("edge {i} -> {j} out of range")));
                }
                if j as usize == i {
                    return Err(Error::invalid(format!("self-loop at node {i}")));
                }
                in_adj[j as usize].push(i as u32);
            }
        }
        // pushes happen in increasing i, so in-lists are already sorted
        Ok(Self {
            positions,
            out_adj,
            in_adj,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.out_adj[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[u32] {
        &self.in_adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_adj[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// All directed edges `(i, j)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&j| (i, j as usize)))
    }

    /// True when `other` contains every edge of `self`.
    pub fn is_subgraph_of(&self, other: &ISGraph) -> bool {
        self.len() == other.len() && self.edges().all(|(i, j)| other.has_edge(i, j))
    }
}

/// How eavesdropper power beyond the sampled window is handled by the
/// colluding builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollusionTail {
    /// Sum over every eavesdropper in the window and nothing else.
    Truncate,
    /// Sum over every eavesdropper in the window, plus the mean power a
    /// Poisson field of the same density would deliver from outside it.
    #[default]
    MeanField,
}

/// Edge rule selecting which edge set is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeRule {
    /// `|x_i - x_j| < |x_i - e*|`, `e*` the nearest eavesdropper.
    Baseline,
    /// Faded gain to `x_j` beats the best faded gain to any eavesdropper.
    Fading,
    /// Path loss with secrecy threshold and unequal noise powers.
    Threshold,
    /// Independent transmission in `sectors` angular sectors.
    Sectorized { sectors: usize },
    /// Eavesdroppers within `radius` of any legitimate node are removed.
    Neutralized { radius: f64 },
    /// Eavesdroppers combine their received power.
    Colluding {
        #[serde(default)]
        tail: CollusionTail,
        /// Accept `b <= 1`, where the aggregate power diverges and the
        /// result depends on the window.
        #[serde(default)]
        allow_divergent: bool,
    },
}

impl EdgeRule {
    pub fn validate(&self, params: &ChannelParams) -> Result<()> {
        match *self {
            EdgeRule::Sectorized { sectors: 0 } => {
                Err(Error::invalid("sectorized rule needs at least one sector"))
            }
            EdgeRule::Neutralized { radius } if !(radius >= 0.0 && radius.is_finite()) => Err(
                Error::invalid(format!("neutralization radius {radius} must be >= 0")),
            ),
            EdgeRule::Colluding { allow_divergent, .. } => {
                if params.gain.kind != GainKind::Unbounded {
                    return Err(Error::invalid("colluding rule requires the unbounded gain"));
                }
                if params.gain.b <= 1.0 && !allow_divergent {
                    return Err(Error::invalid(format!(
                        "colluding rule needs b > 1 (got {}); set allow_divergent to accept truncation bias",
                        params.gain.b
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            EdgeRule::Baseline => "baseline".into(),
            EdgeRule::Fading => "fading".into(),
            EdgeRule::Threshold => "threshold".into(),
            EdgeRule::Sectorized { sectors } => format!("sectorized(L={sectors})"),
            EdgeRule::Neutralized { radius } => format!("neutralized(rho={radius})"),
            EdgeRule::Colluding { .. } => "colluding".into(),
        }
    }

    /// Density of the eavesdroppers that effectively threaten a node under
    /// this rule, used to size the guard margin.
    pub fn effective_eve_density(&self, lambda_ell: f64, lambda_e: f64) -> f64 {
        match *self {
            EdgeRule::Sectorized { sectors } => lambda_e / sectors as f64,
            EdgeRule::Neutralized { radius } => lambda_e * (-PI * lambda_ell * radius * radius).exp(),
            _ => lambda_e,
        }
    }
}

/// Dispatch to the builder selected by `rule`. `seed` drives fading draws
/// and sector offsets.
pub fn build(
    rule: &EdgeRule,
    params: &ChannelParams,
    legit: &PointSet,
    eves: &PointSet,
    seed: u64,
) -> Result<ISGraph> {
    rule.validate(params)?;
    match *rule {
        EdgeRule::Baseline => Ok(build_baseline(legit, eves)),
        EdgeRule::Fading => build_fading(legit, eves, params, seed),
        EdgeRule::Threshold => build_threshold(legit, eves, params),
        EdgeRule::Sectorized { sectors } => build_sectorized(legit, eves, sectors, None, seed),
        EdgeRule::Neutralized { radius } => build_neutralized(legit, eves, radius),
        EdgeRule::Colluding { tail, allow_divergent } => {
            build_colluding(legit, eves, params, tail, allow_divergent)
        }
    }
}

/// Squared distance from each legitimate node to its nearest eavesdropper
/// (`inf` when there are none).
fn nearest_eve_sq(legit: &PointSet, eves: &PointSet) -> Vec<f64> {
    let index = eves.index();
    legit
        .points
        .iter()
        .map(|&x| index.nearest(x).map_or(f64::INFINITY, |(_, d)| d * d))
        .collect()
}

/// Out-lists from a per-node squared radius: `j` is an out-neighbour of `i`
/// when `|x_i - x_j|^2 < radius_sq[i]` and `accept(i, j, d2)` holds.
fn out_lists_within(
    legit: &PointSet,
    radius_sq: &[f64],
    accept: impl Fn(usize, usize, f64) -> bool,
) -> Vec<Vec<u32>> {
    let index = legit.index();
    legit
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut list = Vec::new();
            index.for_each_within_sq(x, radius_sq[i], false, |j, d2| {
                if j != i && accept(i, j, d2) {
                    list.push(j as u32);
                }
            });
            list
        })
        .collect()
}

/// Edge `x_i -> x_j` iff `|x_i - x_j| < |x_i - e*|`.
pub fn build_baseline(legit: &PointSet, eves: &PointSet) -> ISGraph {
    let radius_sq = nearest_eve_sq(legit, eves);
    let out = out_lists_within(legit, &radius_sq, |_, _, _| true);
    ISGraph::from_out_lists(legit.points.clone(), out).expect("valid by construction")
}

const LEGIT_PAIR_TAG: u64 = 0x6c65_6769_7470_6169;
const EVE_PAIR_TAG: u64 = 0x6576_6570_6169_7273;

/// Fading gain of the unordered legitimate pair `{i, j}`.
fn legit_pair_fading(params: &ChannelParams, seed: u64, i: usize, j: usize) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let mut s = PairStream::new(mix(seed ^ LEGIT_PAIR_TAG, a as u64, b as u64));
    draw_fading(&params.fading, &mut s)
}

/// Fading gain from transmitter `i` to eavesdropper `k`.
fn eve_pair_fading(params: &ChannelParams, seed: u64, i: usize, k: usize) -> f64 {
    let mut s = PairStream::new(mix(seed ^ EVE_PAIR_TAG, i as u64, k as u64));
    draw_fading(&params.fading, &mut s)
}

/// Edge iff `g(|x_i - x_j|, Z_ij) > max_k g(|x_i - e_k|, Z_ik)`.
///
/// `Z_ij = Z_ji` is drawn once per unordered pair from a stream keyed by
/// the pair and `seed`; `Z_ik` once per (transmitter, eavesdropper) pair.
pub fn build_fading(
    legit: &PointSet,
    eves: &PointSet,
    params: &ChannelParams,
    seed: u64,
) -> Result<ISGraph> {
    params.validate()?;
    if params.fading.is_deterministic() {
        return Ok(build_baseline(legit, eves));
    }
    let fading_graph = fading_out_lists(legit, eves, params, seed, legit_pair_fading, eve_pair_fading);
    ISGraph::from_out_lists(legit.points.clone(), fading_graph)
}

fn fading_out_lists(
    legit: &PointSet,
    eves: &PointSet,
    params: &ChannelParams,
    seed: u64,
    legit_z: impl Fn(&ChannelParams, u64, usize, usize) -> f64,
    eve_z: impl Fn(&ChannelParams, u64, usize, usize) -> f64,
) -> Vec<Vec<u32>> {
    let g = &params.gain;
    legit
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let threshold = eves
                .points
                .iter()
                .enumerate()
                .map(|(k, &e)| eve_z(params, seed, i, k) * g.path_loss_sq(x.dist2(e)))
                .fold(0.0f64, f64::max);
            legit
                .points
                .iter()
                .enumerate()
                .filter(|&(j, &y)| {
                    j != i && legit_z(params, seed, i, j) * g.path_loss_sq(x.dist2(y)) > threshold
                })
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect()
}

/// Received-gain level a legitimate link must exceed for secrecy rate above
/// `rho`, given total eavesdropper path gain `eve_gain`:
/// `(s_l/s_e) 2^rho G_e + (s_l/P)(2^rho - 1)`.
fn secrecy_level(params: &ChannelParams, eve_gain: f64) -> f64 {
    let two_rho = params.rho.exp2();
    params.sigma2_ell / params.sigma2_e * two_rho * eve_gain
        + params.sigma2_ell / params.p_ell * (two_rho - 1.0)
}

/// Edge iff `g(|x_i - x_j|) > (s_l/s_e) 2^rho g(|x_i - e*|) + (s_l/P)(2^rho - 1)`
/// with `e*` the nearest eavesdropper and no fading.
pub fn build_threshold(legit: &PointSet, eves: &PointSet, params: &ChannelParams) -> Result<ISGraph> {
    params.validate()?;
    let g = params.gain;
    let levels: Vec<f64> = nearest_eve_sq(legit, eves)
        .into_iter()
        .map(|r2| {
            let eve_gain = if r2.is_finite() { g.path_loss_sq(r2) } else { 0.0 };
            secrecy_level(params, eve_gain)
        })
        .collect();
    Ok(level_graph(legit, &levels, params))
}

/// Edges `i -> j` with `g(|x_i - x_j|) > levels[i]`.
fn level_graph(legit: &PointSet, levels: &[f64], params: &ChannelParams) -> ISGraph {
    let g = params.gain;
    let radius_sq: Vec<f64> = levels
        .iter()
        .map(|&level| match g.inverse(level) {
            // pad the candidate radius; the exact predicate decides
            Some(r) => (r * (1.0 + 1e-9)).powi(2),
            None => 0.0,
        })
        .collect();
    let out = out_lists_within(legit, &radius_sq, |i, _, d2| g.path_loss_sq(d2) > levels[i]);
    ISGraph::from_out_lists(legit.points.clone(), out).expect("valid by construction")
}

/// Sectorized transmission: `x_i -> x_j` iff `|x_i - x_j|` is below the
/// distance to the nearest eavesdropper inside the sector of `x_i` that
/// holds `x_j`. Offsets default to independent uniform draws on
/// `[0, 2 pi)` from `seed`.
pub fn build_sectorized(
    legit: &PointSet,
    eves: &PointSet,
    sectors: usize,
    offsets: Option<&[f64]>,
    seed: u64,
) -> Result<ISGraph> {
    if sectors == 0 {
        return Err(Error::invalid("sectorized rule needs at least one sector"));
    }
    if sectors == 1 {
        return Ok(build_baseline(legit, eves));
    }
    let n = legit.len();
    let offsets: Vec<f64> = match offsets {
        Some(o) if o.len() == n => o.to_vec(),
        Some(o) => {
            return Err(Error::invalid(format!("{} offsets for {n} nodes", o.len())));
        }
        None => {
            let mut rng = crate::seed::rng(seed, &[crate::seed::stream::SECTOR_OFFSETS]);
            (0..n).map(|_| rng.random_range(0.0..TAU)).collect()
        }
    };
    let eve_index = eves.index();
    let legit_index = legit.index();
    let out = legit
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let per_sector: Vec<f64> = eve_index
                .nearest_sq_by_class(x, sectors, |k| {
                    let e = eves.points[k];
                    if e == x {
                        0
                    } else {
                        sector_from_bearing(x.bearing_to(e), offsets[i], sectors) - 1
                    }
                })
                .into_iter()
                .map(|d| d.unwrap_or(f64::INFINITY))
                .collect();
            let reach = per_sector.iter().copied().fold(0.0, f64::max);
            let mut list = Vec::new();
            legit_index.for_each_within_sq(x, reach, false, |j, d2| {
                if j == i {
                    return;
                }
                let y = legit.points[j];
                if y == x {
                    return;
                }
                let s = sector_from_bearing(x.bearing_to(y), offsets[i], sectors) - 1;
                if d2 < per_sector[s] {
                    list.push(j as u32);
                }
            });
            list
        })
        .collect();
    ISGraph::from_out_lists(legit.points.clone(), out)
}

/// Baseline rule applied after removing every eavesdropper within `radius`
/// of a legitimate node.
pub fn build_neutralized(legit: &PointSet, eves: &PointSet, radius: f64) -> Result<ISGraph> {
    let survivors = neutralize(eves, legit, radius)?;
    Ok(build_baseline(legit, &survivors))
}

/// Colluding eavesdroppers: edge iff
/// `log2(1 + P g_ij / s_l) - log2(1 + P sum_k g_ik / s_e) > rho`.
pub fn build_colluding(
    legit: &PointSet,
    eves: &PointSet,
    params: &ChannelParams,
    tail: CollusionTail,
    allow_divergent: bool,
) -> Result<ISGraph> {
    params.validate()?;
    EdgeRule::Colluding { tail, allow_divergent }.validate(params)?;
    let g = params.gain;
    let b = g.b;
    let tail = if b <= 1.0 { CollusionTail::Truncate } else { tail };
    let window = legit.window;
    let levels: Vec<f64> = legit
        .points
        .iter()
        .map(|&x| {
            let mut eve_gain: f64 = eves.points.iter().map(|&e| g.path_loss_sq(x.dist2(e))).sum();
            if tail == CollusionTail::MeanField {
                eve_gain += outside_power(x, &window, eves.density, b)?;
            }
            Ok(secrecy_level(params, eve_gain))
        })
        .collect::<Result<_>>()?;
    Ok(level_graph(legit, &levels, params))
}

/// Expected path gain `sum r^(-2b)` at `x` from a Poisson field of the given
/// density restricted to the outside of the window. Each side at distance
/// `h` contributes `density h^(2-2b) / (2b-2)` times the integral of
/// `cos^(2b-2)` over the angles it subtends.
fn outside_power(x: Point2, window: &crate::spatial::Window, density: f64, b: f64) -> Result<f64> {
    if density == 0.0 {
        return Ok(0.0);
    }
    let half = window.half_side();
    let spec = QuadratureSpec {
        rel_tol: 1e-7,
        ..Default::default()
    };
    let sides = [(half - x.x, x.y), (half + x.x, x.y), (half - x.y, x.x), (half + x.y, x.x)];
    let mut total = 0.0;
    for (h, u) in sides {
        if h <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let lo = ((-half - u) / h).atan();
        let hi = ((half - u) / h).atan();
        let span = integrate(|phi| phi.cos().max(0.0).powf(2.0 * b - 2.0), lo, hi, &spec)?;
        total += h.powf(2.0 - 2.0 * b) * span.value;
    }
    Ok(density * total / (2.0 * b - 2.0))
}
