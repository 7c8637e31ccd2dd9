//! Run configuration: a TOML document with one table per subcommand.
//!
//! Every key has a default, so an empty file (or no file) is a valid
//! configuration. `docs/config.md` lists the schema.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelParams, FadingModel, GainKind, GainModel};
use crate::graph::{CollusionTail, EdgeRule};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub channel: ChannelConfig,
    pub window: WindowConfig,
    pub degrees: DegreesConfig,
    pub isolation: IsolationConfig,
    pub msr: MsrConfig,
    pub enhance: EnhanceConfig,
    pub collude: ColludeConfig,
    pub percolation: PercolationConfig,
    pub fullconn: FullConnConfig,
    pub validate: ValidateConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            channel: ChannelConfig::default(),
            window: WindowConfig::default(),
            degrees: DegreesConfig::default(),
            isolation: IsolationConfig::default(),
            msr: MsrConfig::default(),
            enhance: EnhanceConfig::default(),
            collude: ColludeConfig::default(),
            percolation: PercolationConfig::default(),
            fullconn: FullConnConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    Deterministic,
    Rayleigh,
    Nakagami,
    Lognormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub p_ell: f64,
    pub sigma2_ell: f64,
    pub sigma2_e: f64,
    /// Amplitude loss exponent; power decays as `r^(-2b)`.
    pub b: f64,
    pub gain: GainKind,
    pub fading: FadingKind,
    pub nakagami_m: f64,
    pub lognormal_sigma_db: f64,
    /// Secrecy rate threshold, bits per complex dimension.
    pub rho: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            p_ell: 10.0,
            sigma2_ell: 1.0,
            sigma2_e: 1.0,
            b: 2.0,
            gain: GainKind::Unbounded,
            fading: FadingKind::Deterministic,
            nakagami_m: 3.0,
            lognormal_sigma_db: 8.0,
            rho: 0.0,
        }
    }
}

impl ChannelConfig {
    pub fn fading_model(&self) -> FadingModel {
        match self.fading {
            FadingKind::Deterministic => FadingModel::Deterministic,
            FadingKind::Rayleigh => FadingModel::Rayleigh,
            FadingKind::Nakagami => FadingModel::Nakagami { m: self.nakagami_m },
            FadingKind::Lognormal => FadingModel::Lognormal {
                sigma_db: self.lognormal_sigma_db,
            },
        }
    }

    pub fn params(&self) -> Result<ChannelParams> {
        let p = ChannelParams {
            p_ell: self.p_ell,
            sigma2_ell: self.sigma2_ell,
            sigma2_e: self.sigma2_e,
            gain: GainModel::with_any_exponent(self.gain, self.b)?,
            fading: self.fading_model(),
            rho: self.rho,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Half-side of the square whose nodes enter the statistics.
    pub interior_half_side: f64,
    /// Width of the buffer around the interior. Zero or absent picks a
    /// width from the eavesdropper density and the edge rule.
    pub guard_margin: Option<f64>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            interior_half_side: 10.0,
            guard_margin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Baseline,
    Fading,
    Threshold,
    Sectorized,
    Neutralized,
    Colluding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegreesConfig {
    pub lambda_ell: f64,
    pub lambda_e: f64,
    pub trials: usize,
    pub rule: RuleKind,
    pub sectors: usize,
    pub neutralization_radius: f64,
    pub collusion_tail: CollusionTail,
}

impl Default for DegreesConfig {
    fn default() -> Self {
        Self {
            lambda_ell: 1.0,
            lambda_e: 0.4,
            trials: 30,
            rule: RuleKind::Baseline,
            sectors: 4,
            neutralization_radius: 0.5,
            collusion_tail: CollusionTail::MeanField,
        }
    }
}

impl DegreesConfig {
    pub fn edge_rule(&self) -> EdgeRule {
        match self.rule {
            RuleKind::Baseline => EdgeRule::Baseline,
            RuleKind::Fading => EdgeRule::Fading,
            RuleKind::Threshold => EdgeRule::Threshold,
            RuleKind::Sectorized => EdgeRule::Sectorized { sectors: self.sectors },
            RuleKind::Neutralized => EdgeRule::Neutralized {
                radius: self.neutralization_radius,
            },
            RuleKind::Colluding => EdgeRule::Colluding {
                tail: self.collusion_tail,
                allow_divergent: false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsolationConfig {
    pub lambda_ell: f64,
    /// Values of `lambda_e / lambda_ell`.
    pub ratios: Vec<f64>,
    pub trials: usize,
    /// Typical Voronoi cells sampled for the in-isolation reference.
    pub voronoi_cells: usize,
}

impl Default for IsolationConfig {
    fn default() -> Self {
        Self {
            lambda_ell: 1.0,
            ratios: vec![0.1, 0.25, 0.5, 1.0, 2.0, 5.0],
            trials: 30,
            voronoi_cells: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MsrConfig {
    pub lambda_ell: f64,
    pub lambda_e: f64,
    /// Neighbour indices, starting at 1.
    pub neighbors: Vec<u32>,
    pub rate_max: f64,
    pub rate_step: f64,
    pub trials: usize,
}

impl Default for MsrConfig {
    fn default() -> Self {
        Self {
            lambda_ell: 1.0,
            lambda_e: 0.1,
            neighbors: vec![1, 2, 3, 4, 5],
            rate_max: 8.0,
            rate_step: 0.1,
            trials: 100_000,
        }
    }
}

impl MsrConfig {
    pub fn rate_grid(&self) -> Vec<f64> {
        let steps = (self.rate_max / self.rate_step + 1e-9).floor() as usize;
        (0..=steps).map(|k| k as f64 * self.rate_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceConfig {
    pub lambda_ell: f64,
    pub lambda_e: f64,
    pub trials: usize,
    /// Secrecy rate thresholds for the threshold sweep.
    pub rates: Vec<f64>,
    /// Values of `P_l / sigma^2` for the threshold sweep.
    pub snr: Vec<f64>,
    pub sectors: Vec<usize>,
    pub neutralization_radii: Vec<f64>,
    /// Eavesdropper densities for the neutralization sweep.
    pub neutralization_lambda_e: Vec<f64>,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            lambda_ell: 1.0,
            lambda_e: 0.1,
            trials: 30,
            rates: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0],
            snr: vec![1.0, 10.0, 100.0],
            sectors: vec![1, 2, 3, 4, 6, 8],
            neutralization_radii: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            neutralization_lambda_e: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColludeConfig {
    pub lambda_ell: f64,
    pub lambda_e: f64,
    pub trials: usize,
    pub exponents: Vec<f64>,
    pub tail: CollusionTail,
}

impl Default for ColludeConfig {
    fn default() -> Self {
        Self {
            lambda_ell: 1.0,
            lambda_e: 0.1,
            trials: 30,
            exponents: vec![1.25, 1.5, 2.0, 2.5, 3.0, 4.0],
            tail: CollusionTail::MeanField,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PercolationConfig {
    pub lambda_e: f64,
    pub lambda_ell_grid: Vec<f64>,
    pub half_sides: Vec<f64>,
    /// One set of curves per secrecy rate threshold.
    pub rates: Vec<f64>,
    pub trials: usize,
    pub bootstrap_resamples: usize,
}

impl Default for PercolationConfig {
    fn default() -> Self {
        Self {
            lambda_e: 1.0,
            lambda_ell_grid: vec![1.0, 2.0, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0],
            half_sides: vec![10.0, 20.0, 40.0],
            rates: vec![0.0],
            trials: 200,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FullConnConfig {
    pub lambda_e: f64,
    pub lambda_ell_grid: Vec<f64>,
    pub area: f64,
    pub trials: usize,
}

impl Default for FullConnConfig {
    fn default() -> Self {
        Self {
            lambda_e: 1.0,
            lambda_ell_grid: vec![5.0, 10.0, 20.0, 40.0, 80.0],
            area: 1.0,
            trials: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Multiplies every trial count of the suite.
    pub scale: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

fn config_error(msg: impl std::fmt::Display) -> Error {
    Error::Config(msg.to_string())
}

/// Parse `text` as TOML, apply `key=value` overrides (dotted keys), and
/// deserialize. Override values are read as TOML values, falling back to a
/// bare string.
pub fn parse(text: &str, overrides: &[String]) -> Result<Config> {
    let mut doc: toml::Table = text.parse().map_err(config_error)?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| config_error(format!("override `{item}` is not key=value")))?;
        let value = parse_value(raw.trim());
        set_dotted(&mut doc, key.trim(), value)?;
    }
    let cfg: Config = toml::Value::Table(doc).try_into().map_err(config_error)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_dotted(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_error(format!("bad override key `{key}`")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("`{part}` in `{key}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(msg()))
    }
}

fn density(v: f64, name: &str) -> Result<()> {
    check(v >= 0.0 && v.is_finite(), || format!("{name} = {v} must be a finite density >= 0"))
}

fn positive(v: f64, name: &str) -> Result<()> {
    check(v > 0.0 && v.is_finite(), || format!("{name} = {v} must be > 0"))
}

fn nonempty<T>(v: &[T], name: &str) -> Result<()> {
    check(!v.is_empty(), || format!("{name} must not be empty"))
}

fn trials(n: usize, name: &str) -> Result<()> {
    check(n >= 1, || format!("{name} must be >= 1"))
}

impl Config {
    /// Range checks for every section, so that a bad value is reported
    /// before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        self.channel.params().map_err(config_error)?;
        positive(self.window.interior_half_side, "window.interior_half_side")?;
        if let Some(g) = self.window.guard_margin {
            check(g >= 0.0 && g.is_finite(), || format!("window.guard_margin = {g} must be >= 0"))?;
        }

        let d = &self.degrees;
        density(d.lambda_ell, "degrees.lambda_ell")?;
        density(d.lambda_e, "degrees.lambda_e")?;
        trials(d.trials, "degrees.trials")?;
        let mut ch = self.channel.params()?;
        if d.rule != RuleKind::Fading {
            ch.fading = FadingModel::Deterministic;
        }
        d.edge_rule().validate(&ch).map_err(config_error)?;

        let i = &self.isolation;
        density(i.lambda_ell, "isolation.lambda_ell")?;
        nonempty(&i.ratios, "isolation.ratios")?;
        for &r in &i.ratios {
            positive(r, "isolation.ratios entry")?;
        }
        trials(i.trials, "isolation.trials")?;

        let m = &self.msr;
        positive(m.lambda_ell, "msr.lambda_ell")?;
        positive(m.lambda_e, "msr.lambda_e")?;
        nonempty(&m.neighbors, "msr.neighbors")?;
        check(m.neighbors.iter().all(|&k| k >= 1), || "msr.neighbors start at 1".into())?;
        positive(m.rate_max, "msr.rate_max")?;
        positive(m.rate_step, "msr.rate_step")?;
        check(m.rate_max / m.rate_step <= 1e6, || "msr rate grid is too fine".into())?;
        trials(m.trials, "msr.trials")?;

        let e = &self.enhance;
        density(e.lambda_ell, "enhance.lambda_ell")?;
        positive(e.lambda_e, "enhance.lambda_e")?;
        trials(e.trials, "enhance.trials")?;
        for &r in &e.rates {
            check(r >= 0.0 && r.is_finite(), || format!("enhance.rates entry {r} must be >= 0"))?;
        }
        for &s in &e.snr {
            positive(s, "enhance.snr entry")?;
        }
        check(e.sectors.iter().all(|&l| l >= 1), || "enhance.sectors entries must be >= 1".into())?;
        for &r in &e.neutralization_radii {
            check(r >= 0.0 && r.is_finite(), || format!("enhance.neutralization_radii entry {r} must be >= 0"))?;
        }
        for &l in &e.neutralization_lambda_e {
            positive(l, "enhance.neutralization_lambda_e entry")?;
        }

        let c = &self.collude;
        density(c.lambda_ell, "collude.lambda_ell")?;
        positive(c.lambda_e, "collude.lambda_e")?;
        trials(c.trials, "collude.trials")?;
        for &b in &c.exponents {
            check(b > 1.0 && b.is_finite(), || format!("collude.exponents entry {b} must be > 1"))?;
            GainModel::with_any_exponent(GainKind::Unbounded, b).map_err(config_error)?;
        }

        let p = &self.percolation;
        positive(p.lambda_e, "percolation.lambda_e")?;
        nonempty(&p.lambda_ell_grid, "percolation.lambda_ell_grid")?;
        for &l in &p.lambda_ell_grid {
            density(l, "percolation.lambda_ell_grid entry")?;
        }
        check(p.lambda_ell_grid.windows(2).all(|w| w[0] < w[1]), || {
            "percolation.lambda_ell_grid must be increasing".into()
        })?;
        check(p.half_sides.len() >= 2, || "percolation.half_sides needs at least two windows".into())?;
        for &h in &p.half_sides {
            positive(h, "percolation.half_sides entry")?;
        }
        nonempty(&p.rates, "percolation.rates")?;
        for &r in &p.rates {
            check(r >= 0.0 && r.is_finite(), || format!("percolation.rates entry {r} must be >= 0"))?;
        }
        trials(p.trials, "percolation.trials")?;

        let f = &self.fullconn;
        density(f.lambda_e, "fullconn.lambda_e")?;
        nonempty(&f.lambda_ell_grid, "fullconn.lambda_ell_grid")?;
        for &l in &f.lambda_ell_grid {
            density(l, "fullconn.lambda_ell_grid entry")?;
        }
        positive(f.area, "fullconn.area")?;
        trials(f.trials, "fullconn.trials")?;

        positive(self.validate.scale, "validate.scale")
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse("", &[]).unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.msr.lambda_e, 0.1);
        assert_eq!(cfg.channel.b, 2.0);
        assert_eq!(cfg.channel.p_ell / cfg.channel.sigma2_ell, 10.0);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = parse(
            "seed = 3\n[degrees]\nlambda_e = 0.5\n",
            &["degrees.trials=7".into(), "channel.fading = rayleigh".into(), "percolation.rates=[0, 1]".into()],
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.degrees.lambda_e, 0.5);
        assert_eq!(cfg.degrees.trials, 7);
        assert_eq!(cfg.channel.fading, FadingKind::Rayleigh);
        assert_eq!(cfg.percolation.rates, vec![0.0, 1.0]);
    }

    #[test]
    fn bad_documents_are_config_errors() {
        for (text, over) in [
            ("seed = ", vec![]),
            ("[degrees]\nlamda_e = 1.0", vec![]),
            ("", vec!["degrees.lambda_e=-1".to_string()]),
            ("", vec!["percolation.half_sides=[10]".to_string()]),
            ("", vec!["collude.exponents=[1.0]".to_string()]),
            ("", vec!["noequals".to_string()]),
            ("", vec!["seed.x=1".to_string()]),
        ] {
            assert!(matches!(parse(text, &over), Err(Error::Config(_))), "{text:?} {over:?}");
        }
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = Config::default();
        assert_eq!(a.digest(), Config::default().digest());
        assert_eq!(a.digest().len(), 64);
        let mut b = a.clone();
        b.degrees.lambda_e = 0.41;
        assert_ne!(a.digest(), b.digest());
    }
}
