//! Closed-form and quadrature results for degrees, isolation, secrecy-rate
//! outage and connectivity of the Poisson secure-link graph.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::channel::{ChannelParams, GainModel};
use crate::quadrature::{integrate_to_infinity, QuadratureSpec};
use crate::spatial::CellAreaSample;
use crate::stats::SummaryStats;
use crate::{Error, Result};

/// Densities of legitimate nodes and eavesdroppers (per unit area).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    pub lambda_ell: f64,
    pub lambda_e: f64,
}

impl DensityPair {
    pub fn new(lambda_ell: f64, lambda_e: f64) -> Result<Self> {
        let d = Self { lambda_ell, lambda_e };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_ell >= 0.0 && self.lambda_ell.is_finite()) {
            return Err(Error::NegativeDensity(self.lambda_ell));
        }
        if !(self.lambda_e > 0.0 && self.lambda_e.is_finite()) {
            return Err(Error::invalid(format!(
                "eavesdropper density must be > 0 (got {})",
                self.lambda_e
            )));
        }
        Ok(())
    }

    /// `lambda_ell / lambda_e`.
    pub fn ratio(&self) -> f64 {
        self.lambda_ell / self.lambda_e
    }

    /// Probability that a given node is closer than the nearest eavesdropper.
    fn win_probability(&self) -> f64 {
        self.lambda_ell / (self.lambda_ell + self.lambda_e)
    }
}

/// Geometric out-degree law `q^n (1 - q)`, `q = l / (l + e)`.
pub fn out_degree_pmf(n: u64, d: DensityPair) -> f64 {
    let q = d.win_probability();
    let e = 1.0 - q;
    if n == 0 {
        e
    } else {
        (n as f64 * q.ln()).exp() * e
    }
}

/// Mean in- and out-degree under the baseline rule.
pub fn avg_degree(d: DensityPair) -> f64 {
    d.ratio()
}

pub fn p_out_isol(d: DensityPair) -> f64 {
    d.lambda_e / (d.lambda_ell + d.lambda_e)
}

/// In-isolation probability `E[exp(-(l/e) A)]` from plain samples of the
/// typical cell area `A`.
pub fn p_in_isol(d: DensityPair, areas: &[f64]) -> Result<SummaryStats> {
    if areas.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, available: 0 });
    }
    let r = d.ratio();
    let xs: Vec<f64> = areas.iter().map(|&a| (-r * a).exp()).collect();
    Ok(SummaryStats::from_samples(&xs))
}

/// As [`p_in_isol`], using the unbiased per-sample estimator of
/// `exp(-r A)` that hit-or-miss cell samples admit.
pub fn p_in_isol_from_cells(d: DensityPair, cells: &[CellAreaSample]) -> Result<SummaryStats> {
    if cells.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, available: 0 });
    }
    let r = d.ratio();
    let xs: Vec<f64> = cells.iter().map(|c| c.exp_neg(r)).collect();
    Ok(SummaryStats::from_samples(&xs))
}

/// Estimates of `E[A^k]`, `k = 1..=max_k`, from hit-or-miss cell samples.
pub fn voronoi_moments(cells: &[CellAreaSample], max_k: u32) -> Vec<SummaryStats> {
    (1..=max_k)
        .map(|k| {
            let xs: Vec<f64> = cells.iter().map(|c| c.power(k)).collect();
            SummaryStats::from_samples(&xs)
        })
        .collect()
}

/// Largest `n` for which Stirling numbers are computed.
pub const STIRLING_MAX_N: u32 = 20;

/// Stirling number of the second kind by exact recurrence.
pub fn stirling2(n: u32, k: u32) -> Result<u64> {
    if n > STIRLING_MAX_N {
        return Err(Error::StirlingOverflow { n, k });
    }
    if k > n {
        return Ok(0);
    }
    // row[j] = S(m, j)
    let mut row = vec![0u64; k as usize + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=k.min(m) as usize).rev() {
            row[j] = (j as u64)
                .checked_mul(row[j])
                .and_then(|v| v.checked_add(row[j - 1]))
                .ok_or(Error::StirlingOverflow { n, k })?;
        }
        row[0] = 0;
    }
    Ok(row[k as usize])
}

/// `E[N_in^n] = sum_k r^k S(n, k) E[A^k]` where `moments[k - 1] = E[A^k]`.
pub fn in_degree_moment(n: u32, d: DensityPair, moments: &[f64]) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if moments.len() < n as usize {
        return Err(Error::InsufficientPoints {
            needed: n as usize,
            available: moments.len(),
        });
    }
    let r = d.ratio();
    let mut total = 0.0;
    for k in 1..=n {
        total += r.powi(k as i32) * stirling2(n, k)? as f64 * moments[k as usize - 1];
    }
    Ok(total)
}

/// Mean degree with a secrecy threshold and no fading.
///
/// With `T = pi l_e R^2` for the nearest eavesdropper at distance `R`, a
/// node links to every legitimate node closer than the radius where
/// `g(r) = (s_l/s_e) 2^rho g(R) + (s_l/P)(2^rho - 1)`. Averaging the disk
/// area over `T ~ Exp(1)` gives, for `g(r) = r^(-2b)`,
/// `(l/e) int t e^-t (c1 + c2 (t / (pi l_e))^b)^(-1/b) dt`.
pub fn avg_degree_threshold(d: DensityPair, params: &ChannelParams, spec: &QuadratureSpec) -> Result<f64> {
    d.validate()?;
    params.validate()?;
    let g = params.gain;
    let two_rho = params.rho.exp2();
    let c1 = params.sigma2_ell / params.sigma2_e * two_rho;
    let c2 = params.sigma2_ell / params.p_ell * (two_rho - 1.0);
    let radius_sq = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r = (t / (PI * d.lambda_e)).sqrt();
        match g.inverse(c1 * g.path_loss(r) + c2) {
            Some(x) => x * x,
            None => 0.0,
        }
    };
    let integral = integrate_to_infinity(|t| (-t).exp() * radius_sq(t), 0.0, spec)?;
    Ok(PI * d.lambda_ell * integral.value)
}

/// Mean degree with `sectors` independent transmission sectors.
pub fn avg_degree_sectorized(d: DensityPair, sectors: usize) -> f64 {
    sectors as f64 * d.ratio()
}

/// Lower bound on the mean degree when eavesdroppers within `radius` of a
/// legitimate node are neutralized.
pub fn avg_degree_neutralized_lb(d: DensityPair, radius: f64) -> f64 {
    let a = PI * d.lambda_e * radius * radius;
    d.ratio() * (a + a.exp())
}

/// `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Mean degree when all eavesdroppers combine their signals (`b > 1`).
pub fn avg_degree_colluding(d: DensityPair, b: f64) -> Result<f64> {
    if !(b > 1.0) {
        return Err(Error::invalid(format!("colluding mean degree needs b > 1 (got {b})")));
    }
    Ok(d.ratio() * sinc(1.0 / b))
}

/// Probability that the secrecy rate to the `i`-th nearest legitimate
/// neighbour is strictly positive.
pub fn p_exist(i: u32, d: DensityPair) -> f64 {
    d.win_probability().powi(i as i32)
}

/// CDF of the secrecy rate from the typical node to its `i`-th nearest
/// legitimate neighbour, with unbounded path loss `r^(-2b)`, no fading and
/// equal noise powers; `snr = P / s`.
///
/// Conditioning on the nearest eavesdropper at squared distance `v`, the
/// rate exceeds `rho` iff the squared neighbour distance is below
/// `U(v) = v (snr / ((2^rho - 1) v^b + 2^rho snr))^(1/b)`. The neighbour's
/// `pi l_l` times squared distance is Gamma(i, 1), so
/// `F(rho) = 1 - int e^-t P_i(pi l_l U(t / (pi l_e))) dt` with `P_i` the
/// regularized lower incomplete gamma function.
pub fn msr_cdf(rho: f64, i: u32, d: DensityPair, b: f64, snr: f64, spec: &QuadratureSpec) -> Result<f64> {
    d.validate()?;
    GainModel::unbounded(b)?;
    if i == 0 {
        return Err(Error::invalid("neighbour index starts at 1"));
    }
    if !(rho >= 0.0) || !(snr > 0.0) {
        return Err(Error::invalid(format!("need rho >= 0 and snr > 0 (got {rho}, {snr})")));
    }
    if rho.is_infinite() {
        return Ok(1.0);
    }
    let two_rho = rho.exp2();
    let shape = i as f64;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let v = t / (PI * d.lambda_e);
        let u = v * (snr / ((two_rho - 1.0) * v.powf(b) + two_rho * snr)).powf(1.0 / b);
        (-t).exp() * gamma_lr(shape, PI * d.lambda_ell * u)
    };
    let survival = integrate_to_infinity(integrand, 0.0, spec)?;
    Ok((1.0 - survival.value).clamp(0.0, 1.0))
}

/// Largest secrecy rate any link can reach: `log2(1 + P g(0) / s)`.
/// Infinite for unbounded path loss unless `P = 0`.
pub fn rho_max(p: f64, g0: f64, sigma2: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    (1.0 + p * g0 / sigma2).log2()
}

/// Limiting upper bound on the probability that every node of a region of
/// area `area` reaches the origin.
pub fn in_conn_upper_bound(lambda_e: f64, area: f64) -> f64 {
    let c = 6.0 * PI / (8.0 * PI + 3.0 * 3f64.sqrt());
    1.0 - c * (1.0 - (-lambda_e * area).exp())
}
