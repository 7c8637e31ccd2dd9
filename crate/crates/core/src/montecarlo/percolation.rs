use rand_distr::{Binomial, Distribution};

use super::{run_trials, sample_trial, ExperimentConfig};
use crate::analytic::DensityPair;
use crate::graph::{build, reaches, ComponentKind};
use crate::seed::{self, stream};
use crate::spatial::Window;
use crate::stats::{crossing, isotonic, SummaryStats};
use crate::{Error, Result};

/// Boundary-reaching frequency of the probe's component for one kind,
/// density and window.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationPoint {
    pub lambda_ell: f64,
    pub half_side: f64,
    pub kind: ComponentKind,
    pub hits: usize,
    pub trials: usize,
    pub estimate: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PercolationTable {
    /// Ordered by window, then density, then kind.
    pub points: Vec<PercolationPoint>,
}

impl PercolationTable {
    /// Points for one kind and window, in density order.
    pub fn curve(&self, kind: ComponentKind, half_side: f64) -> Vec<&PercolationPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == kind && p.half_side == half_side)
            .collect()
    }

    pub fn largest_half_side(&self) -> Option<f64> {
        self.points.iter().map(|p| p.half_side).reduce(f64::max)
    }
}

/// Estimate, for every density in `lambda_ell_grid` and window half-side in
/// `half_sides`, the probability that the probe's component of each kind
/// reaches the boundary annulus (width `cfg.window.guard_margin()`).
///
/// `cfg.densities.lambda_ell` is ignored in favour of the grid and
/// `cfg.trials` trials are run per grid point and window.
pub fn estimate_percolation(
    cfg: &ExperimentConfig,
    lambda_ell_grid: &[f64],
    half_sides: &[f64],
) -> Result<PercolationTable> {
    cfg.validate()?;
    if half_sides.len() < 2 {
        return Err(Error::invalid("percolation needs a ladder of at least two windows"));
    }
    if lambda_ell_grid.is_empty() {
        return Err(Error::invalid("empty density grid"));
    }
    let margin = cfg.window.guard_margin();
    let mut table = PercolationTable::default();
    for (wi, &half) in half_sides.iter().enumerate() {
        let window = Window::new(half, margin)?;
        for (li, &lambda_ell) in lambda_ell_grid.iter().enumerate() {
            let d = DensityPair {
                lambda_ell,
                lambda_e: cfg.densities.lambda_e,
            };
            let events = run_trials(cfg.trials, |t| {
                let s = sample_trial(cfg.master_seed, &[wi as u64, li as u64, t], d, window, true)?;
                let g = build(&cfg.edge_rule, &cfg.channel, &s.legit, &s.eves, s.graph_seed)?;
                let pos = g.positions();
                Ok(ComponentKind::ALL.map(|kind| reaches(&g, 0, kind, |j| window.in_annulus(pos[j]))))
            })?;
            for (k, kind) in ComponentKind::ALL.into_iter().enumerate() {
                let hits = events.iter().filter(|e| e[k]).count();
                table.points.push(PercolationPoint {
                    lambda_ell,
                    half_side: half,
                    kind,
                    hits,
                    trials: cfg.trials,
                    estimate: SummaryStats::proportion(hits, cfg.trials),
                });
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalDensity {
    /// Density where the monotone fit crosses the level.
    pub estimate: Option<f64>,
    /// 2.5% and 97.5% quantiles of the parametric bootstrap crossings.
    pub ci95: Option<(f64, f64)>,
    /// Fraction of bootstrap resamples whose fit crossed the level.
    pub bootstrap_coverage: f64,
}

fn fitted_crossing(lambdas: &[f64], p: &[f64], weights: &[f64], level: f64) -> Option<f64> {
    crossing(lambdas, &isotonic(p, weights), level)
}

/// Crossing of `level` by the isotonic fit of a percolation curve, with a
/// parametric bootstrap interval from `resamples` binomial redraws.
pub fn critical_density(curve: &[&PercolationPoint], level: f64, resamples: usize, seed: u64) -> CriticalDensity {
    let lambdas: Vec<f64> = curve.iter().map(|p| p.lambda_ell).collect();
    let weights: Vec<f64> = curve.iter().map(|p| p.trials as f64).collect();
    let phat: Vec<f64> = curve.iter().map(|p| p.hits as f64 / p.trials as f64).collect();
    let estimate = fitted_crossing(&lambdas, &phat, &weights, level);
    let mut rng = seed::rng(seed, &[stream::BOOTSTRAP]);
    let mut found: Vec<f64> = (0..resamples)
        .filter_map(|_| {
            let p: Vec<f64> = curve
                .iter()
                .zip(&phat)
                .map(|(pt, &q)| {
                    let draw = Binomial::new(pt.trials as u64, q).expect("p in [0, 1]").sample(&mut rng);
                    draw as f64 / pt.trials as f64
                })
                .collect();
            fitted_crossing(&lambdas, &p, &weights, level)
        })
        .collect();
    found.sort_by(f64::total_cmp);
    let ci95 = (!found.is_empty()).then(|| {
        let q = |f: f64| found[((found.len() - 1) as f64 * f).round() as usize];
        (q(0.025), q(0.975))
    });
    CriticalDensity {
        estimate,
        ci95,
        bootstrap_coverage: if resamples == 0 {
            0.0
        } else {
            found.len() as f64 / resamples as f64
        },
    }
}
