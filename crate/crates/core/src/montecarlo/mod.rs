//! Seeded Monte Carlo estimators.
//!
//! Trial `t` of an experiment draws its point processes from streams keyed
//! by `(master_seed, path.., t, stream)`, so results are identical for any
//! number of worker threads. Trials run in parallel and are collected in
//! trial order before any reduction.

mod connectivity;
mod degrees;
mod fading;
mod msr;
mod percolation;

use rayon::prelude::*;

use crate::analytic::DensityPair;
use crate::channel::ChannelParams;
use crate::graph::EdgeRule;
use crate::seed::{self, stream};
use crate::spatial::{sample_poisson, PointKind, PointSet, Window};
use crate::{Error, Result};

pub use connectivity::{estimate_full_connectivity, FullConnectivity};
pub use degrees::{estimate_degrees, estimate_isolation, DegreeEstimate, DegreeHistogram, IsolationEstimate};
pub use fading::{fading_invariance_test, FadingComparison, FadingInvarianceReport};
pub use msr::{estimate_msr_outage, probe_window, sample_msr, MsrOutage};
pub use percolation::{
    critical_density, estimate_percolation, CriticalDensity, PercolationPoint, PercolationTable,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub densities: DensityPair,
    pub channel: ChannelParams,
    pub edge_rule: EdgeRule,
    pub window: Window,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Window sized as `interior_half_side` plus the default guard margin
    /// for this rule and channel.
    pub fn new(
        densities: DensityPair,
        channel: ChannelParams,
        edge_rule: EdgeRule,
        interior_half_side: f64,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let guard = default_guard_margin(&edge_rule, densities, &channel);
        let cfg = Self {
            densities,
            channel,
            edge_rule,
            window: Window::new(interior_half_side + guard, guard)?,
            trials,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_densities(self.densities)?;
        self.channel.validate()?;
        self.edge_rule.validate(&self.channel)?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        Ok(())
    }

    /// Interior half-side, i.e. the window less its guard margin.
    pub fn interior_half_side(&self) -> f64 {
        self.window.half_side() - self.window.guard_margin()
    }
}

fn validate_densities(d: DensityPair) -> Result<()> {
    for v in [d.lambda_ell, d.lambda_e] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::NegativeDensity(v));
        }
    }
    Ok(())
}

/// Guard margin beyond which the eavesdropper deciding an interior node's
/// links lies with probability below about `1e-3`.
///
/// The base width `sqrt(ln 1000 / (pi l))` uses the density of
/// eavesdroppers that can block a link under the rule. With fading, a far
/// eavesdropper can win through a strong fade, so the width grows by
/// `exp(3 s / (2b))` with `s` the standard deviation of `ln Z`.
pub fn default_guard_margin(rule: &EdgeRule, d: DensityPair, channel: &ChannelParams) -> f64 {
    let effective = rule.effective_eve_density(d.lambda_ell, d.lambda_e);
    if effective <= 0.0 {
        return 0.0;
    }
    let base = Window::default_guard_margin(effective);
    match rule {
        EdgeRule::Fading => base * (3.0 * channel.fading.log_spread() / (2.0 * channel.gain.b)).exp(),
        _ => base,
    }
}

/// The two point processes of one trial plus the seed for its graph.
#[derive(Debug, Clone)]
pub struct TrialSample {
    pub legit: PointSet,
    pub eves: PointSet,
    pub graph_seed: u64,
}

/// Sample trial `path` (the last element is normally the trial index).
/// With `probe`, a legitimate node is placed at the origin as node 0.
pub fn sample_trial(
    master_seed: u64,
    path: &[u64],
    d: DensityPair,
    window: Window,
    probe: bool,
) -> Result<TrialSample> {
    let keyed = |tag: u64| {
        let mut p = path.to_vec();
        p.push(tag);
        p
    };
    let mut rng = seed::rng(master_seed, &keyed(stream::LEGIT));
    let mut legit = sample_poisson(d.lambda_ell, window, PointKind::Legitimate, &mut rng)?;
    if probe {
        legit = legit.with_probe();
    }
    let mut rng = seed::rng(master_seed, &keyed(stream::EAVESDROPPERS));
    let eves = sample_poisson(d.lambda_e, window, PointKind::Eavesdropper, &mut rng)?;
    Ok(TrialSample {
        legit,
        eves,
        graph_seed: seed::derive_u64(master_seed, &keyed(stream::FADING)),
    })
}

/// Run `f(t)` for `t in 0..trials` in parallel, returning results in trial
/// order. The first error (in trial order) wins.
pub fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Run `f` on a dedicated pool of `workers` threads (all cores when
/// `None`). Worker count never changes results.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("workers must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Expected number of interior legitimate nodes per trial.
pub fn expected_interior_nodes(cfg: &ExperimentConfig) -> f64 {
    let h = cfg.interior_half_side();
    4.0 * h * h * cfg.densities.lambda_ell
}

/// Smallest number of trials expected to yield `nodes` interior nodes.
pub fn trials_for_nodes(cfg: &ExperimentConfig, nodes: usize) -> usize {
    let per = expected_interior_nodes(cfg);
    if per <= 0.0 {
        return 1;
    }
    ((nodes as f64 / per).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests;
