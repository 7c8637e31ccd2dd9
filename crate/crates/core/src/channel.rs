//! Propagation model and link secrecy rate.
//!
//! Received power is `P * g(r, z)` with either the unbounded gain
//! `z / r^(2b)` or the bounded gain `z / (1 + r^(2b))`, where `b` is the
//! amplitude loss exponent. Fading gains `z` are normalised to unit mean.
//! All quantities are linear (not dB).

use std::f64::consts::{LN_10, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Range of amplitude loss exponents accepted without an override.
pub const EXPONENT_RANGE: (f64, f64) = (0.8, 4.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    Unbounded,
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    pub kind: GainKind,
    pub b: f64,
}

impl GainModel {
    /// Validated constructor; `b` must lie in [`EXPONENT_RANGE`].
    pub fn new(kind: GainKind, b: f64) -> Result<Self> {
        if !(EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&b) {
            return Err(Error::invalid(format!(
                "amplitude loss exponent {b} outside [{}, {}]; use GainModel::with_any_exponent to override",
                EXPONENT_RANGE.0, EXPONENT_RANGE.1
            )));
        }
        Ok(Self { kind, b })
    }

    /// Accepts any `b > 0`.
    pub fn with_any_exponent(kind: GainKind, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!("amplitude loss exponent {b} must be > 0")));
        }
        Ok(Self { kind, b })
    }

    pub fn unbounded(b: f64) -> Result<Self> {
        Self::new(GainKind::Unbounded, b)
    }

    pub fn bounded(b: f64) -> Result<Self> {
        Self::new(GainKind::Bounded, b)
    }

    /// Path-loss part `g(r, 1)`; `+inf` at `r = 0` for the unbounded model.
    #[inline]
    pub fn path_loss(&self, r: f64) -> f64 {
        let p = r.powf(2.0 * self.b);
        match self.kind {
            GainKind::Unbounded => 1.0 / p,
            GainKind::Bounded => 1.0 / (1.0 + p),
        }
    }

    /// Path loss computed from a squared distance.
    #[inline]
    pub(crate) fn path_loss_sq(&self, r2: f64) -> f64 {
        let p = r2.powf(self.b);
        match self.kind {
            GainKind::Unbounded => 1.0 / p,
            GainKind::Bounded => 1.0 / (1.0 + p),
        }
    }

    /// Largest radius with `g(r, 1) > level` (exclusive bound), or `None`
    /// when no radius qualifies. Infinite when `level <= 0`.
    pub fn inverse(&self, level: f64) -> Option<f64> {
        if level <= 0.0 {
            return Some(f64::INFINITY);
        }
        let inv = 1.0 / (2.0 * self.b);
        match self.kind {
            GainKind::Unbounded => Some(level.powf(-inv)),
            GainKind::Bounded => (level < 1.0).then(|| (1.0 / level - 1.0).powf(inv)),
        }
    }

    /// Gain at zero distance.
    pub fn at_zero(&self) -> f64 {
        match self.kind {
            GainKind::Unbounded => f64::INFINITY,
            GainKind::Bounded => 1.0,
        }
    }
}

/// Power gain `g(r, z)`.
pub fn gain(r: f64, z: f64, model: &GainModel) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("distance {r} must be finite and >= 0")));
    }
    if !(z > 0.0) {
        return Err(Error::invalid(format!("fading gain {z} must be > 0")));
    }
    if r == 0.0 && model.kind == GainKind::Unbounded {
        return Err(Error::Singularity);
    }
    Ok(z * model.path_loss(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FadingModel {
    #[serde(alias = "unity", alias = "none")]
    Deterministic,
    Rayleigh,
    Nakagami { m: f64 },
    Lognormal { sigma_db: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingModel::Nakagami { m } if !(m >= 0.5 && m.is_finite()) => {
                Err(Error::invalid(format!("Nakagami m = {m} must be >= 0.5")))
            }
            FadingModel::Lognormal { sigma_db } if !(sigma_db > 0.0 && sigma_db.is_finite()) => {
                Err(Error::invalid(format!("log-normal sigma_dB = {sigma_db} must be > 0")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, FadingModel::Deterministic)
    }

    /// Standard deviation of `ln Z`.
    pub fn log_spread(&self) -> f64 {
        match *self {
            FadingModel::Deterministic => 0.0,
            // Var ln Z = trigamma(shape), and trigamma(1) = pi^2/6
            FadingModel::Rayleigh => PI / 6f64.sqrt(),
            FadingModel::Nakagami { m } => trigamma(m).sqrt(),
            FadingModel::Lognormal { sigma_db } => sigma_db * LN_10 / 10.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            FadingModel::Deterministic => "deterministic".into(),
            FadingModel::Rayleigh => "rayleigh".into(),
            FadingModel::Nakagami { m } => format!("nakagami(m={m})"),
            FadingModel::Lognormal { sigma_db } => format!("lognormal({sigma_db}dB)"),
        }
    }
}

/// One unit-mean fading power gain.
pub fn sample_fading<R: Rng + ?Sized>(model: &FadingModel, rng: &mut R) -> Result<f64> {
    model.validate()?;
    Ok(draw_fading(model, rng))
}

/// Unchecked draw for hot loops; the model must already be validated.
#[inline]
pub(crate) fn draw_fading<R: Rng + ?Sized>(model: &FadingModel, rng: &mut R) -> f64 {
    match *model {
        FadingModel::Deterministic => 1.0,
        FadingModel::Rayleigh => {
            let z: f64 = Exp1.sample(rng);
            z.max(f64::MIN_POSITIVE)
        }
        FadingModel::Nakagami { m } => {
            let g = Gamma::new(m, 1.0 / m).expect("validated shape");
            g.sample(rng).max(f64::MIN_POSITIVE)
        }
        FadingModel::Lognormal { sigma_db } => {
            let s = sigma_db * LN_10 / 10.0;
            LogNormal::new(-s * s / 2.0, s).expect("validated sigma").sample(rng)
        }
    }
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 6.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0
        + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// Link budget shared by every node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Common transmit power `P_l`.
    pub p_ell: f64,
    /// Noise power at legitimate receivers.
    pub sigma2_ell: f64,
    /// Noise power at eavesdroppers.
    pub sigma2_e: f64,
    pub gain: GainModel,
    pub fading: FadingModel,
    /// Secrecy rate threshold in bits per complex dimension.
    pub rho: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} must be > 0")))
            }
        };
        positive(self.p_ell, "p_ell")?;
        positive(self.sigma2_ell, "sigma2_ell")?;
        positive(self.sigma2_e, "sigma2_e")?;
        if !(self.rho >= 0.0) {
            return Err(Error::invalid(format!("rho = {} must be >= 0", self.rho)));
        }
        if !(self.gain.b > 0.0) {
            return Err(Error::invalid("amplitude loss exponent must be > 0"));
        }
        self.fading.validate()
    }

    /// Path-loss-only channel with equal noise, given `P / sigma^2`.
    pub fn path_loss_only(snr: f64, b: f64, rho: f64) -> Result<Self> {
        let params = Self {
            p_ell: snr,
            sigma2_ell: 1.0,
            sigma2_e: 1.0,
            gain: GainModel::unbounded(b)?,
            fading: FadingModel::Deterministic,
            rho,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn snr_ell(&self) -> f64 {
        self.p_ell / self.sigma2_ell
    }
}

/// Received power `P_l * g(r, z)`.
pub fn received_power(params: &ChannelParams, r: f64, z: f64) -> Result<f64> {
    Ok(params.p_ell * gain(r, z, &params.gain)?)
}

/// Maximum secrecy rate `[log2(1 + P_l/s_l) - log2(1 + P_e/s_e)]^+`.
pub fn msr(prx_legit: f64, prx_eve: f64, sigma2_ell: f64, sigma2_e: f64) -> f64 {
    let r = (prx_legit / sigma2_ell).ln_1p() - (prx_eve / sigma2_e).ln_1p();
    (r / std::f64::consts::LN_2).max(0.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gain_examples() {
        let ub = GainModel::unbounded(2.0).unwrap();
        assert_eq!(gain(1.0, 1.0, &ub).unwrap(), 1.0);
        assert_eq!(gain(2.0, 1.0, &ub).unwrap(), 0.0625);
        assert!(matches!(gain(0.0, 1.0, &ub), Err(Error::Singularity)));
        for b in [0.8, 1.0, 3.3] {
            let bd = GainModel::bounded(b).unwrap();
            assert_eq!(gain(0.0, 1.0, &bd).unwrap(), 1.0);
        }
        assert!(GainModel::unbounded(0.5).is_err());
        assert!(GainModel::with_any_exponent(GainKind::Unbounded, 0.5).is_ok());
        assert!(gain(1.0, 0.0, &ub).is_err());
    }

    #[test]
    fn gain_strictly_decreasing_and_vanishing() {
        for kind in [GainKind::Unbounded, GainKind::Bounded] {
            for b in [0.8, 1.0, 2.0, 4.0] {
                let m = GainModel::new(kind, b).unwrap();
                let radii: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.01).collect();
                for w in radii.windows(2) {
                    assert!(gain(w[0], 1.0, &m).unwrap() > gain(w[1], 1.0, &m).unwrap());
                }
                assert!(gain(1e6, 1.0, &m).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for kind in [GainKind::Unbounded, GainKind::Bounded] {
            let m = GainModel::new(kind, 1.7).unwrap();
            for r in [0.1, 0.7, 2.0, 9.0] {
                let back = m.inverse(m.path_loss(r)).unwrap();
                assert_relative_eq!(back, r, max_relative = 1e-9);
            }
        }
        assert_eq!(GainModel::bounded(2.0).unwrap().inverse(1.5), None);
    }

    #[test]
    fn received_power_examples() {
        let mut p = ChannelParams::path_loss_only(10.0, 1.0, 0.0).unwrap();
        assert_eq!(received_power(&p, 1.0, 1.0).unwrap(), 10.0);
        p.gain = GainModel::unbounded(2.0).unwrap();
        assert_relative_eq!(received_power(&p, 2.0, 0.5).unwrap(), 0.3125);
        let a = received_power(&p, 1.3, 0.7).unwrap();
        p.p_ell *= 2.0;
        assert_relative_eq!(received_power(&p, 1.3, 0.7).unwrap(), 2.0 * a);
    }

    #[test]
    fn msr_examples() {
        assert_eq!(msr(2.0, 2.0, 1.0, 1.0), 0.0);
        assert_relative_eq!(msr(5.0, 0.0, 2.0, 1.0), (1.0f64 + 2.5).log2());
        assert_relative_eq!(msr(3.0, 1.0, 1.0, 1.0), 1.0, max_relative = 1e-14);
        assert_eq!(msr(1.0, 3.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn msr_positive_iff_legit_stronger() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let a: f64 = rng.random_range(0.0..10.0);
            let b: f64 = rng.random_range(0.0..10.0);
            let s: f64 = rng.random_range(0.1..3.0);
            assert_eq!(msr(a, b, s, s) > 0.0, a > b);
        }
    }

    fn moments(model: FadingModel, n: usize, seed: u64) -> (f64, f64, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| sample_fading(&model, &mut rng).unwrap()).collect();
        let m = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, var, v)
    }

    #[test]
    fn fading_models_have_unit_mean() {
        let n = 100_000;
        let models = [
            FadingModel::Rayleigh,
            FadingModel::Nakagami { m: 3.0 },
            FadingModel::Nakagami { m: 0.5 },
            FadingModel::Lognormal { sigma_db: 4.0 },
        ];
        for (i, model) in models.into_iter().enumerate() {
            let (m, var, v) = moments(model, n, 10 + i as u64);
            assert!(v.iter().all(|z| *z > 0.0));
            let se = (var / n as f64).sqrt();
            assert!((m - 1.0).abs() < 3.0 * se, "{model:?}: mean {m}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_fading(&FadingModel::Deterministic, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn rayleigh_is_unit_exponential() {
        let n = 100_000;
        let (m, var, v) = moments(FadingModel::Rayleigh, n, 3);
        // sd of the sample variance of Exp(1) is sqrt((mu4 - 1)/n) = sqrt(8/n)
        assert!((m - 1.0).abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 3.0 * (8.0 / n as f64).sqrt(), "var {var}");
        let m4 = v.iter().map(|z| (z - m).powi(4)).sum::<f64>() / n as f64;
        assert!(m4 > 5.0 && m4 < 13.0);
    }

    #[test]
    fn nakagami_one_matches_rayleigh_ks() {
        let n = 100_000;
        let (_, _, mut a) = moments(FadingModel::Rayleigh, n, 31);
        let (_, _, mut b) = moments(FadingModel::Nakagami { m: 1.0 }, n, 32);
        let d = crate::stats::ks_two_sample(&mut a, &mut b);
        let crit = crate::stats::ks_critical(0.01, n, n);
        assert!(d < crit, "D = {d}, critical {crit}");
    }

    #[test]
    fn invalid_fading_parameters_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_fading(&FadingModel::Nakagami { m: 0.4 }, &mut rng).is_err());
        assert!(sample_fading(&FadingModel::Lognormal { sigma_db: 0.0 }, &mut rng).is_err());
    }

    #[test]
    fn log_spread_matches_sampled_log_sd() {
        let n = 200_000;
        for (i, model) in [
            FadingModel::Rayleigh,
            FadingModel::Nakagami { m: 3.0 },
            FadingModel::Lognormal { sigma_db: 8.0 },
        ]
        .into_iter()
        .enumerate()
        {
            let (_, _, v) = moments(model, n, 50 + i as u64);
            let logs: Vec<f64> = v.iter().map(|z| z.ln()).collect();
            let m = logs.iter().sum::<f64>() / n as f64;
            let sd = (logs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            assert_relative_eq!(sd, model.log_spread(), max_relative = 0.02);
        }
    }

    #[test]
    fn params_validation() {
        let mut p = ChannelParams::path_loss_only(10.0, 2.0, 0.0).unwrap();
        p.sigma2_e = 0.0;
        assert!(p.validate().is_err());
        assert!(ChannelParams::path_loss_only(10.0, 2.0, -1.0).is_err());
        assert_relative_eq!(db_to_linear(10.0), 10.0);
        assert_relative_eq!(dbm_to_watts(30.0), 1.0);
    }
}
