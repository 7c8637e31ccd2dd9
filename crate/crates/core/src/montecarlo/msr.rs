use super::{run_trials, sample_trial, ExperimentConfig};
use crate::channel::{msr, received_power};
use crate::analytic::DensityPair;
use crate::spatial::{Point2, Window};
use crate::stats::SummaryStats;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MsrOutage {
    pub rho_grid: Vec<f64>,
    /// `P{R <= rho}` at each grid point.
    pub outage: Vec<SummaryStats>,
    /// `P{R > 0}`.
    pub exist: SummaryStats,
    /// One rate per trial, in trial order.
    pub rates: Vec<f64>,
}

/// Chance, per trial, that the window misses a point the probe needs.
const MISS_PROBABILITY: f64 = 1e-9;

/// Smallest `t` with `P{Poisson(t) < k} < MISS_PROBABILITY`.
fn poisson_mean_for(k: u32) -> f64 {
    let below = |t: f64| {
        let mut term = (-t).exp();
        let mut sum = term;
        for j in 1..k {
            term *= t / j as f64;
            sum += term;
        }
        sum
    };
    let mut t = 1.0;
    while below(t) >= MISS_PROBABILITY {
        t *= 1.05;
    }
    t
}

/// Window around a probe at the origin large enough to hold its `neighbors`
/// nearest legitimate nodes and its nearest eavesdropper except with
/// negligible probability.
pub fn probe_window(d: DensityPair, neighbors: u32) -> Result<Window> {
    let radius = |lambda: f64, k: u32| (poisson_mean_for(k) / (std::f64::consts::PI * lambda)).sqrt();
    if !(d.lambda_ell > 0.0 && d.lambda_e > 0.0) {
        return Err(Error::invalid("probe window needs both densities > 0"));
    }
    Window::new(radius(d.lambda_ell, neighbors.max(1)).max(radius(d.lambda_e, 1)), 0.0)
}

/// One secrecy-rate draw per trial: from a probe at the origin to its
/// `i`-th nearest legitimate neighbour, against the nearest eavesdropper,
/// without fading. No eavesdropper in the window counts as zero leakage.
pub fn sample_msr(cfg: &ExperimentConfig, i: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    if i == 0 {
        return Err(Error::invalid("neighbour index starts at 1"));
    }
    let p = &cfg.channel;
    run_trials(cfg.trials, |t| {
        let s = sample_trial(cfg.master_seed, &[t], cfg.densities, cfg.window, false)?;
        let (_, r_legit) = s.legit.index().kth_nearest(Point2::ORIGIN, i)?;
        let prx_e = match s.eves.index().nearest(Point2::ORIGIN) {
            Some((_, r)) => received_power(p, r, 1.0)?,
            None => 0.0,
        };
        let prx_l = received_power(p, r_legit, 1.0)?;
        Ok(msr(prx_l, prx_e, p.sigma2_ell, p.sigma2_e))
    })
}

/// Outage probability `P{R <= rho}` over `rho_grid`. With `<=`, the value at
/// `rho = 0` is the probability that no positive rate exists.
pub fn estimate_msr_outage(cfg: &ExperimentConfig, i: usize, rho_grid: &[f64]) -> Result<MsrOutage> {
    if rho_grid.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::invalid("rate grid values must be >= 0"));
    }
    let rates = sample_msr(cfg, i)?;
    let n = rates.len();
    let outage = rho_grid
        .iter()
        .map(|&rho| SummaryStats::proportion(rates.iter().filter(|&&r| r <= rho).count(), n))
        .collect();
    let exist = SummaryStats::proportion(rates.iter().filter(|&&r| r > 0.0).count(), n);
    Ok(MsrOutage {
        rho_grid: rho_grid.to_vec(),
        outage,
        exist,
        rates,
    })
}
