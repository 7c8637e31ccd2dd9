//! One function per subcommand: run the sweep described by the config and
//! return its result tables. Column orders are part of the output format
//! and are listed in `docs/config.md`.

use crate::analytic::{
    avg_degree, avg_degree_colluding, avg_degree_neutralized_lb, avg_degree_sectorized, avg_degree_threshold,
    in_conn_upper_bound, msr_cdf, out_degree_pmf, p_exist, p_in_isol_from_cells, p_out_isol, DensityPair,
};
use crate::channel::{ChannelParams, FadingModel, GainKind};
use crate::graph::EdgeRule;
use crate::montecarlo::{
    critical_density, default_guard_margin, estimate_degrees, estimate_full_connectivity, estimate_msr_outage,
    estimate_percolation, probe_window, DegreeEstimate, ExperimentConfig,
};
use crate::quadrature::QuadratureSpec;
use crate::seed;
use crate::spatial::{VoronoiSampler, Window};
use crate::stats::{chi2_gof_clustered, SummaryStats};
use crate::{Error, Result};

use super::config::{Config, RuleKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name, including the `.csv` extension.
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    /// CSV with a leading `config_digest` column. Any non-finite number
    /// fails the whole table.
    pub fn to_csv(&self, digest: &str) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["config_digest"];
        header.extend(&self.header);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![digest.to_string()];
            for (cell, col) in row.iter().zip(&self.header) {
                rec.push(match cell {
                    Cell::Text(s) => s.clone(),
                    Cell::Int(v) => v.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Empty => String::new(),
                    Cell::Float(v) if v.is_finite() => format!("{v}"),
                    Cell::Float(_) => {
                        return Err(Error::NonFiniteOutput {
                            column: format!("{}:{col}", self.name),
                        })
                    }
                });
            }
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Seed for grid point `path` of a sweep, so points use unrelated streams.
fn point_seed(master: u64, sweep: u64, path: &[u64]) -> u64 {
    let mut p = vec![sweep];
    p.extend_from_slice(path);
    seed::derive_u64(master, &p)
}

mod sweep {
    pub const DEGREES: u64 = 101;
    pub const ISOLATION: u64 = 102;
    pub const MSR: u64 = 103;
    pub const THRESHOLD: u64 = 104;
    pub const SECTORIZED: u64 = 105;
    pub const NEUTRALIZED: u64 = 106;
    pub const COLLUDE: u64 = 107;
    pub const PERCOLATION: u64 = 108;
    pub const FULLCONN: u64 = 109;
}

/// Experiment over the configured interior square, with the configured or
/// the rule's default guard margin.
fn experiment(
    cfg: &Config,
    d: DensityPair,
    channel: ChannelParams,
    rule: EdgeRule,
    trials: usize,
    master_seed: u64,
) -> Result<ExperimentConfig> {
    let interior = cfg.window.interior_half_side;
    let guard = match cfg.window.guard_margin {
        Some(g) if g > 0.0 => g,
        _ => default_guard_margin(&rule, d, &channel),
    };
    let exp = ExperimentConfig {
        densities: d,
        channel,
        edge_rule: rule,
        window: Window::new(interior + guard, guard)?,
        trials,
        master_seed,
    };
    exp.validate()?;
    Ok(exp)
}

/// Channel with fading switched off, for rules that ignore it.
fn deterministic(cfg: &Config) -> Result<ChannelParams> {
    let mut ch = cfg.channel.params()?;
    ch.fading = FadingModel::Deterministic;
    Ok(ch)
}

fn se_pair(s: &SummaryStats) -> [Cell; 2] {
    [s.mean.into(), s.std_error.into()]
}

/// Closed-form mean degree for a rule, where one exists.
fn analytic_mean(rule: &EdgeRule, d: DensityPair, ch: &ChannelParams) -> Result<Option<f64>> {
    Ok(match *rule {
        EdgeRule::Baseline | EdgeRule::Fading => Some(avg_degree(d)),
        EdgeRule::Threshold => Some(avg_degree_threshold(d, ch, &QuadratureSpec::default())?),
        EdgeRule::Sectorized { sectors } => Some(avg_degree_sectorized(d, sectors)),
        EdgeRule::Neutralized { radius } => Some(avg_degree_neutralized_lb(d, radius)),
        EdgeRule::Colluding { .. } => Some(avg_degree_colluding(d, ch.gain.b)?),
    })
}

pub fn degrees(cfg: &Config) -> Result<Vec<Table>> {
    let dc = &cfg.degrees;
    let d = DensityPair::new(dc.lambda_ell, dc.lambda_e)?;
    let rule = dc.edge_rule();
    let ch = if dc.rule == RuleKind::Fading {
        cfg.channel.params()?
    } else {
        deterministic(cfg)?
    };
    let exp = experiment(cfg, d, ch, rule.clone(), dc.trials, point_seed(cfg.seed, sweep::DEGREES, &[]))?;
    let est = estimate_degrees(&exp)?;
    let geometric = matches!(rule, EdgeRule::Baseline | EdgeRule::Fading);
    let chi = geometric.then(|| chi2_gof_clustered(&est.per_trial_out, |k| out_degree_pmf(k as u64, d)));

    let mut summary = Table::new(
        "degrees_summary.csv",
        &[
            "rule",
            "lambda_ell",
            "lambda_e",
            "trials",
            "interior_nodes",
            "mean_out",
            "mean_out_se",
            "mean_in",
            "mean_in_se",
            "analytic_mean",
            "p_out_isol",
            "p_out_isol_se",
            "p_in_isol",
            "p_in_isol_se",
            "chi2_statistic",
            "chi2_design_effect",
            "chi2_adjusted_p",
        ],
    );
    let mut row: Vec<Cell> = vec![
        rule.label().into(),
        d.lambda_ell.into(),
        d.lambda_e.into(),
        dc.trials.into(),
        est.interior_nodes.into(),
    ];
    row.extend(se_pair(&est.mean_out));
    row.extend(se_pair(&est.mean_in));
    row.push(analytic_mean(&rule, d, &ch)?.into());
    row.extend(se_pair(&est.p_out_isol));
    row.extend(se_pair(&est.p_in_isol));
    row.push(chi.map(|c| c.raw.statistic).into());
    row.push(chi.map(|c| c.design_effect).into());
    row.push(chi.map(|c| c.adjusted.p_value).into());
    summary.push(row);

    Ok(vec![summary, degree_pmf(&est, geometric.then_some(d))])
}

fn degree_pmf(est: &DegreeEstimate, geometric: Option<DensityPair>) -> Table {
    let mut t = Table::new(
        "degree_pmf.csv",
        &["degree", "out_count", "out_pmf", "in_count", "in_pmf", "analytic_out_pmf"],
    );
    let h = &est.histogram;
    let (out_pmf, in_pmf) = (h.out_pmf(), h.in_pmf());
    for k in 0..h.out_counts.len().max(h.in_counts.len()) {
        t.push(vec![
            k.into(),
            Cell::Int(h.out_counts.get(k).copied().unwrap_or(0)),
            out_pmf.get(k).copied().unwrap_or(0.0).into(),
            Cell::Int(h.in_counts.get(k).copied().unwrap_or(0)),
            in_pmf.get(k).copied().unwrap_or(0.0).into(),
            geometric.map(|d| out_degree_pmf(k as u64, d)).into(),
        ]);
    }
    t
}

pub fn isolation(cfg: &Config) -> Result<Vec<Table>> {
    let ic = &cfg.isolation;
    let ch = deterministic(cfg)?;
    let cells = VoronoiSampler::default().sample_many(point_seed(cfg.seed, sweep::ISOLATION, &[u64::MAX]), ic.voronoi_cells)?;
    let mut t = Table::new(
        "isolation.csv",
        &[
            "ratio",
            "lambda_ell",
            "lambda_e",
            "interior_nodes",
            "p_out_isol",
            "p_out_isol_se",
            "p_out_isol_analytic",
            "p_in_isol",
            "p_in_isol_se",
            "p_in_isol_voronoi",
            "p_in_isol_voronoi_se",
        ],
    );
    for (k, &ratio) in ic.ratios.iter().enumerate() {
        let d = DensityPair::new(ic.lambda_ell, ratio * ic.lambda_ell)?;
        let seed = point_seed(cfg.seed, sweep::ISOLATION, &[k as u64]);
        let est = estimate_degrees(&experiment(cfg, d, ch, EdgeRule::Baseline, ic.trials, seed)?)?;
        let vor = p_in_isol_from_cells(d, &cells)?;
        let mut row: Vec<Cell> = vec![ratio.into(), d.lambda_ell.into(), d.lambda_e.into(), est.interior_nodes.into()];
        row.extend(se_pair(&est.p_out_isol));
        row.push(p_out_isol(d).into());
        row.extend(se_pair(&est.p_in_isol));
        row.extend(se_pair(&vor));
        t.push(row);
    }
    Ok(vec![t])
}

pub fn msr(cfg: &Config) -> Result<Vec<Table>> {
    let mc = &cfg.msr;
    let d = DensityPair::new(mc.lambda_ell, mc.lambda_e)?;
    let ch = deterministic(cfg)?;
    // the closed form assumes equal noise and the unbounded gain
    let closed_form = ch.sigma2_ell == ch.sigma2_e && ch.gain.kind == GainKind::Unbounded;
    let grid = mc.rate_grid();
    let spec = QuadratureSpec::default();
    let mut outage = Table::new(
        "msr_outage.csv",
        &["neighbor", "rate", "outage", "outage_se", "outage_analytic"],
    );
    let mut exist = Table::new("msr_exist.csv", &["neighbor", "trials", "p_exist", "p_exist_se", "p_exist_analytic"]);
    for (k, &i) in mc.neighbors.iter().enumerate() {
        let exp = ExperimentConfig {
            densities: d,
            channel: ch,
            edge_rule: EdgeRule::Baseline,
            window: probe_window(d, i)?,
            trials: mc.trials,
            master_seed: point_seed(cfg.seed, sweep::MSR, &[k as u64]),
        };
        let est = estimate_msr_outage(&exp, i as usize, &grid)?;
        for (rate, o) in grid.iter().zip(&est.outage) {
            let analytic = if closed_form {
                Some(msr_cdf(*rate, i, d, ch.gain.b, ch.snr_ell(), &spec)?)
            } else {
                None
            };
            outage.push(vec![i.into(), (*rate).into(), o.mean.into(), o.std_error.into(), analytic.into()]);
        }
        exist.push(vec![
            i.into(),
            mc.trials.into(),
            est.exist.mean.into(),
            est.exist.std_error.into(),
            p_exist(i, d).into(),
        ]);
    }
    Ok(vec![outage, exist])
}

const ENHANCE_HEADER: [&str; 12] = [
    "technique",
    "parameter",
    "lambda_ell",
    "lambda_e",
    "snr",
    "interior_nodes",
    "mean_out",
    "mean_out_se",
    "mean_in",
    "mean_in_se",
    "analytic",
    "analytic_kind",
];

pub fn enhance(cfg: &Config) -> Result<Vec<Table>> {
    let ec = &cfg.enhance;
    let base = deterministic(cfg)?;
    let mut t = Table::new("enhance.csv", &ENHANCE_HEADER);
    #[allow(clippy::too_many_arguments)]
    fn push(
        t: &mut Table,
        technique: &str,
        parameter: f64,
        d: DensityPair,
        ch: &ChannelParams,
        est: &DegreeEstimate,
        analytic: f64,
        kind: &str,
    ) {
        let mut row: Vec<Cell> = vec![
            technique.into(),
            parameter.into(),
            d.lambda_ell.into(),
            d.lambda_e.into(),
            ch.snr_ell().into(),
            est.interior_nodes.into(),
        ];
        row.extend(se_pair(&est.mean_out));
        row.extend(se_pair(&est.mean_in));
        row.push(analytic.into());
        row.push(kind.into());
        t.push(row);
    }

    let d = DensityPair::new(ec.lambda_ell, ec.lambda_e)?;
    for (si, &snr) in ec.snr.iter().enumerate() {
        for (ri, &rate) in ec.rates.iter().enumerate() {
            let ch = ChannelParams {
                p_ell: snr * base.sigma2_ell,
                rho: rate,
                ..base
            };
            let seed = point_seed(cfg.seed, sweep::THRESHOLD, &[si as u64, ri as u64]);
            let est = estimate_degrees(&experiment(cfg, d, ch, EdgeRule::Threshold, ec.trials, seed)?)?;
            let analytic = avg_degree_threshold(d, &ch, &QuadratureSpec::default())?;
            push(&mut t, "threshold", rate, d, &ch, &est, analytic, "exact");
        }
    }
    for (li, &sectors) in ec.sectors.iter().enumerate() {
        let rule = EdgeRule::Sectorized { sectors };
        let seed = point_seed(cfg.seed, sweep::SECTORIZED, &[li as u64]);
        let est = estimate_degrees(&experiment(cfg, d, base, rule, ec.trials, seed)?)?;
        push(&mut t, "sectorized", sectors as f64, d, &base, &est, avg_degree_sectorized(d, sectors), "exact");
    }
    for (ei, &lambda_e) in ec.neutralization_lambda_e.iter().enumerate() {
        let d = DensityPair::new(ec.lambda_ell, lambda_e)?;
        for (ri, &radius) in ec.neutralization_radii.iter().enumerate() {
            let rule = EdgeRule::Neutralized { radius };
            let seed = point_seed(cfg.seed, sweep::NEUTRALIZED, &[ei as u64, ri as u64]);
            let est = estimate_degrees(&experiment(cfg, d, base, rule, ec.trials, seed)?)?;
            let bound = avg_degree_neutralized_lb(d, radius);
            push(&mut t, "neutralized", radius, d, &base, &est, bound, "lower_bound");
        }
    }
    Ok(vec![t])
}

pub fn collude(cfg: &Config) -> Result<Vec<Table>> {
    let cc = &cfg.collude;
    let d = DensityPair::new(cc.lambda_ell, cc.lambda_e)?;
    let base = deterministic(cfg)?;
    let mut t = Table::new(
        "collude.csv",
        &[
            "b",
            "lambda_ell",
            "lambda_e",
            "interior_nodes",
            "mean_out",
            "mean_out_se",
            "mean_in",
            "mean_in_se",
            "normalized_out",
            "normalized_out_se",
            "normalized_analytic",
        ],
    );
    for (k, &b) in cc.exponents.iter().enumerate() {
        let ch = ChannelParams {
            gain: crate::channel::GainModel::with_any_exponent(GainKind::Unbounded, b)?,
            ..base
        };
        let rule = EdgeRule::Colluding {
            tail: cc.tail,
            allow_divergent: false,
        };
        let seed = point_seed(cfg.seed, sweep::COLLUDE, &[k as u64]);
        let est = estimate_degrees(&experiment(cfg, d, ch, rule, cc.trials, seed)?)?;
        let ratio = d.ratio();
        let mut row: Vec<Cell> = vec![b.into(), d.lambda_ell.into(), d.lambda_e.into(), est.interior_nodes.into()];
        row.extend(se_pair(&est.mean_out));
        row.extend(se_pair(&est.mean_in));
        row.push((est.mean_out.mean / ratio).into());
        row.push((est.mean_out.std_error / ratio).into());
        row.push((avg_degree_colluding(d, b)? / ratio).into());
        t.push(row);
    }
    Ok(vec![t])
}

pub fn percolation(cfg: &Config) -> Result<Vec<Table>> {
    let pc = &cfg.percolation;
    let base = deterministic(cfg)?;
    let mut points = Table::new(
        "percolation.csv",
        &["rate", "half_side", "lambda_ell", "kind", "hits", "trials", "p", "p_se"],
    );
    let mut critical = Table::new(
        "percolation_critical.csv",
        &["rate", "half_side", "kind", "crossing_found", "lambda_c", "ci_low", "ci_high", "bootstrap_coverage"],
    );
    let master = point_seed(cfg.seed, sweep::PERCOLATION, &[]);
    for &rate in &pc.rates {
        let ch = ChannelParams { rho: rate, ..base };
        let d = DensityPair::new(pc.lambda_ell_grid[0], pc.lambda_e)?;
        let guard = default_guard_margin(&EdgeRule::Threshold, d, &ch);
        // the same seeds for every rate, so curves at different rates are
        // compared on the same node sets
        let exp = ExperimentConfig {
            densities: d,
            channel: ch,
            edge_rule: EdgeRule::Threshold,
            window: Window::new(pc.half_sides[0], guard)?,
            trials: pc.trials,
            master_seed: master,
        };
        let table = estimate_percolation(&exp, &pc.lambda_ell_grid, &pc.half_sides)?;
        for p in &table.points {
            points.push(vec![
                rate.into(),
                p.half_side.into(),
                p.lambda_ell.into(),
                p.kind.label().into(),
                p.hits.into(),
                p.trials.into(),
                p.estimate.mean.into(),
                p.estimate.std_error.into(),
            ]);
        }
        for &half in &pc.half_sides {
            for kind in crate::graph::ComponentKind::ALL {
                let c = critical_density(&table.curve(kind, half), 0.5, pc.bootstrap_resamples, master);
                push_crossing(&mut critical, rate, half, kind.label(), &c);
            }
        }
    }
    Ok(vec![points, critical])
}

fn push_crossing(t: &mut Table, rate: f64, half: f64, kind: &str, c: &crate::montecarlo::CriticalDensity) {
    t.push(vec![
        rate.into(),
        half.into(),
        kind.into(),
        c.estimate.is_some().into(),
        c.estimate.into(),
        c.ci95.map(|x| x.0).into(),
        c.ci95.map(|x| x.1).into(),
        c.bootstrap_coverage.into(),
    ]);
}

pub fn fullconn(cfg: &Config) -> Result<Vec<Table>> {
    let fc = &cfg.fullconn;
    let ch = deterministic(cfg)?;
    let mut t = Table::new(
        "fullconn.csv",
        &[
            "lambda_ell",
            "lambda_e",
            "area",
            "trials",
            "p_out_con",
            "p_out_con_se",
            "p_in_con",
            "p_in_con_se",
            "p_in_con_upper_bound",
            "mean_region_nodes",
        ],
    );
    for (k, &lambda_ell) in fc.lambda_ell_grid.iter().enumerate() {
        let d = DensityPair {
            lambda_ell,
            lambda_e: fc.lambda_e,
        };
        let guard = default_guard_margin(&EdgeRule::Baseline, d, &ch);
        let half = fc.area.sqrt() / 2.0;
        let exp = ExperimentConfig {
            densities: d,
            channel: ch,
            edge_rule: EdgeRule::Baseline,
            window: Window::new(half + guard, guard)?,
            trials: fc.trials,
            master_seed: point_seed(cfg.seed, sweep::FULLCONN, &[k as u64]),
        };
        let est = estimate_full_connectivity(&exp, fc.area)?;
        let mut row: Vec<Cell> = vec![lambda_ell.into(), fc.lambda_e.into(), fc.area.into(), fc.trials.into()];
        row.extend(se_pair(&est.p_out_con));
        row.extend(se_pair(&est.p_in_con));
        row.push(in_conn_upper_bound(fc.lambda_e, fc.area).into());
        row.push(est.region_nodes.mean.into());
        t.push(row);
    }
    Ok(vec![t])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_digest_and_rejects_nan() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec![1.5.into(), Cell::Empty]);
        let text = String::from_utf8(t.to_csv("abc").unwrap()).unwrap();
        assert_eq!(text, "config_digest,a,b\nabc,1.5,\n");
        t.push(vec![f64::NAN.into(), "z".into()]);
        assert!(matches!(t.to_csv("abc"), Err(Error::NonFiniteOutput { .. })));
    }
}
