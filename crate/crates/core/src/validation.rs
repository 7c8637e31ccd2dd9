//! Monte Carlo versus closed-form acceptance suite.
//!
//! Twelve criteria, each with fixed parameters and tolerances. A criterion
//! that misses its tolerance is reported as failed with the numbers that
//! decided it; nothing is retried or re-seeded.

use std::f64::consts::PI;
use std::time::Instant;

use crate::analytic::{
    avg_degree, avg_degree_colluding, avg_degree_neutralized_lb, avg_degree_threshold, in_conn_upper_bound,
    msr_cdf, out_degree_pmf, p_exist, p_in_isol_from_cells, p_out_isol, sinc, DensityPair,
};
use crate::channel::{ChannelParams, FadingModel};
use crate::cli::config::Config;
use crate::cli::tables::{self, Cell, Table};
use crate::graph::{CollusionTail, ComponentKind, EdgeRule};
use crate::montecarlo::{
    critical_density, estimate_degrees, estimate_full_connectivity, estimate_percolation, fading_invariance_test,
    probe_window, sample_msr, with_workers, ExperimentConfig, PercolationTable,
};
use crate::quadrature::QuadratureSpec;
use crate::seed;
use crate::spatial::{VoronoiSampler, Window};
use crate::stats::{chi2_gof_clustered, SummaryStats};
use crate::Result;

pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub seed: u64,
    /// Multiplies every trial count.
    pub scale: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { seed: 1, scale: 1.0 }
    }
}

impl Settings {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            seed: cfg.seed,
            scale: cfg.validate.scale,
        }
    }

    fn trials(&self, base: usize) -> usize {
        ((base as f64 * self.scale).ceil() as usize).max(2)
    }

    fn seed_for(&self, id: u8, path: &[u64]) -> u64 {
        let mut p = vec![u64::from(id)];
        p.extend_from_slice(path);
        seed::derive_u64(self.seed, &p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>7.1}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "degree law",
    "isolation ordering",
    "fading invariance",
    "threshold degradation",
    "sectorization",
    "neutralization",
    "collusion",
    "secrecy rate law",
    "percolation",
    "threshold and percolation",
    "full connectivity",
    "determinism",
];

/// Collects sub-checks of one criterion.
struct Checks {
    ok: bool,
    parts: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            ok: true,
            parts: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, text: String) {
        self.ok &= ok;
        self.parts.push(if ok { text } else { format!("{text} [miss]") });
    }

    fn note(&mut self, text: String) {
        self.parts.push(text);
    }

    fn finish(self) -> (bool, String) {
        (self.ok, self.parts.join("; "))
    }
}

fn pm(s: &SummaryStats) -> String {
    format!("{:.4}+-{:.4}", s.mean, s.std_error)
}

fn baseline_channel() -> ChannelParams {
    ChannelParams::path_loss_only(10.0, 2.0, 0.0).expect("valid channel")
}

fn dp(lambda_ell: f64, lambda_e: f64) -> DensityPair {
    DensityPair { lambda_ell, lambda_e }
}

/// Enough trials of an interior square of half-side `interior` to cover
/// `nodes` interior nodes on average.
fn trials_for(nodes: usize, lambda_ell: f64, interior: f64) -> usize {
    (nodes as f64 / (4.0 * interior * interior * lambda_ell)).ceil() as usize
}

fn degree_law(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 0.4);
    let trials = s.trials(trials_for(10_000, 1.0, 10.0) + 5);
    let cfg = ExperimentConfig::new(d, baseline_channel(), EdgeRule::Baseline, 10.0, trials, s.seed_for(1, &[]))?;
    let est = estimate_degrees(&cfg)?;
    let chi = chi2_gof_clustered(&est.per_trial_out, |k| out_degree_pmf(k as u64, d));
    let mut c = Checks::new();
    c.check(est.interior_nodes >= 10_000, format!("{} interior nodes", est.interior_nodes));
    c.check(
        est.mean_out.z_to(2.5) <= 3.0,
        format!("E[N_out] {} (z {:.2})", pm(&est.mean_out), est.mean_out.z_to(2.5)),
    );
    c.check(
        est.mean_in.z_to(2.5) <= 3.0,
        format!("E[N_in] {} (z {:.2})", pm(&est.mean_in), est.mean_in.z_to(2.5)),
    );
    c.check(
        chi.passes(SIGNIFICANCE),
        format!(
            "chi2 {:.1} on {} dof, raw p {:.2e}, design effect {:.2}, dispersion {:.2}, adjusted p {:.3}",
            chi.raw.statistic, chi.raw.dof, chi.raw.p_value, chi.design_effect, chi.dispersion, chi.adjusted.p_value
        ),
    );
    Ok(c.finish())
}

fn isolation(s: &Settings) -> Result<(bool, String)> {
    let cells = VoronoiSampler::default().sample_many(s.seed_for(2, &[u64::MAX]), s.trials(4000))?;
    let mut c = Checks::new();
    for (k, ratio) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let d = dp(1.0, ratio);
        let cfg = ExperimentConfig::new(
            d,
            baseline_channel(),
            EdgeRule::Baseline,
            10.0,
            s.trials(30),
            s.seed_for(2, &[k as u64]),
        )?;
        let est = estimate_degrees(&cfg)?;
        let vor = p_in_isol_from_cells(d, &cells)?;
        let (pin, pout) = (est.p_in_isol, est.p_out_isol);
        c.check(pin.mean < pout.mean, format!("ratio {ratio}: p_in {} < p_out {}", pm(&pin), pm(&pout)));
        let z_out = pout.z_to(p_out_isol(d));
        c.check(z_out <= 3.0, format!("p_out vs {:.4} z {z_out:.2}", p_out_isol(d)));
        let z_in = pin.z_diff(&vor);
        c.check(z_in <= 3.0, format!("p_in vs Voronoi {} z {z_in:.2}", pm(&vor)));
    }
    Ok(c.finish())
}

fn fading(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 0.4);
    let models = [
        FadingModel::Deterministic,
        FadingModel::Rayleigh,
        FadingModel::Nakagami { m: 3.0 },
        FadingModel::Lognormal { sigma_db: 8.0 },
    ];
    // the window is sized for the heaviest-tailed model
    let mut ch = baseline_channel();
    ch.fading = models[3];
    let trials = s.trials(trials_for(10_000, 1.0, 10.0) + 5);
    let cfg = ExperimentConfig::new(d, ch, EdgeRule::Fading, 10.0, trials, s.seed_for(3, &[]))?;
    let report = fading_invariance_test(&cfg, &models, SIGNIFICANCE)?;
    let mut c = Checks::new();
    c.check(
        report.estimates.iter().all(|e| e.interior_nodes >= 10_000),
        format!("{} interior nodes", report.estimates[0].interior_nodes),
    );
    for cmp in &report.comparisons {
        let (a, b) = (models[cmp.first].label(), models[cmp.second].label());
        c.check(
            cmp.out_degree.passes(SIGNIFICANCE),
            format!("{a}/{b} adjusted p {:.3}", cmp.out_degree.adjusted.p_value),
        );
        c.check(cmp.mean_in_z <= 3.0, format!("{a}/{b} E[N_in] z {:.2}", cmp.mean_in_z));
    }
    Ok(c.finish())
}

fn threshold(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 0.1);
    let spec = QuadratureSpec::default();
    let mut c = Checks::new();
    let at_zero = avg_degree_threshold(d, &baseline_channel(), &spec)?;
    let rel = (at_zero - 10.0).abs() / 10.0;
    c.check(rel <= 1e-6, format!("rate 0 gives {at_zero:.9} (rel {rel:.1e})"));
    for (k, rate) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let ch = ChannelParams::path_loss_only(10.0, 2.0, rate)?;
        let q = avg_degree_threshold(d, &ch, &spec)?;
        let cfg = ExperimentConfig::new(d, ch, EdgeRule::Threshold, 8.0, s.trials(120), s.seed_for(4, &[k as u64]))?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        let tol = (3.0 * mc.std_error).max(0.05 * q);
        let gap = (mc.mean - q) / q;
        c.check(
            (mc.mean - q).abs() <= tol,
            format!("rate {rate}: MC {} vs {q:.4} (gap {:+.2}%)", pm(&mc), 100.0 * gap),
        );
    }
    Ok(c.finish())
}

fn sectorization(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 1.0);
    let mut c = Checks::new();
    for (k, sectors) in [2usize, 4, 8].into_iter().enumerate() {
        let rule = EdgeRule::Sectorized { sectors };
        let cfg = ExperimentConfig::new(d, baseline_channel(), rule, 10.0, s.trials(30), s.seed_for(5, &[k as u64]))?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        let want = sectors as f64 * d.ratio();
        c.check(mc.z_to(want) <= 3.0, format!("L={sectors}: {} vs {want} (z {:.2})", pm(&mc), mc.z_to(want)));
    }
    Ok(c.finish())
}

fn neutralization(s: &Settings) -> Result<(bool, String)> {
    let mut c = Checks::new();
    for (i, lambda_e) in [0.5, 1.0].into_iter().enumerate() {
        let d = dp(1.0, lambda_e);
        for (j, radius) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            let rule = EdgeRule::Neutralized { radius };
            let seed = s.seed_for(6, &[i as u64, j as u64]);
            let cfg = ExperimentConfig::new(d, baseline_channel(), rule, 10.0, s.trials(40), seed)?;
            let mc = estimate_degrees(&cfg)?.mean_out;
            let bound = avg_degree_neutralized_lb(d, radius);
            let gap = (mc.mean - bound) / bound;
            c.check(
                mc.mean >= bound,
                format!("lambda_e {lambda_e} radius {radius}: {} >= {bound:.4}", pm(&mc)),
            );
            if radius == 0.25 {
                c.check(
                    gap < 0.10,
                    format!("gap {:.1}%+-{:.1}%", 100.0 * gap, 100.0 * mc.std_error / bound),
                );
                // diagnostic only: same form with the legitimate density in
                // the exponent, i.e. eavesdroppers thinned by the vacancy of
                // the neutralized union
                let disk = PI * radius * radius;
                let thinned = d.ratio() * (d.lambda_e * disk + (d.lambda_ell * disk).exp());
                c.note(format!("thinned-density form {thinned:.4} (gap {:+.1}%)", 100.0 * (mc.mean - thinned) / thinned));
            }
        }
    }
    Ok(c.finish())
}

fn collusion(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 0.1);
    let rule = EdgeRule::Colluding {
        tail: CollusionTail::MeanField,
        allow_divergent: false,
    };
    let mut c = Checks::new();
    for (k, b) in [1.5, 2.0, 3.0, 4.0].into_iter().enumerate() {
        let ch = ChannelParams::path_loss_only(10.0, b, 0.0)?;
        let cfg = ExperimentConfig::new(d, ch, rule.clone(), 10.0, s.trials(30), s.seed_for(7, &[k as u64]))?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        let want = avg_degree_colluding(d, b)?;
        if b == 2.0 {
            let tol = (3.0 * mc.std_error).max(0.05 * want);
            c.check((mc.mean - want).abs() <= tol, format!("b=2: {} vs {want:.4}", pm(&mc)));
        }
        let norm = mc.mean / avg_degree(d);
        let rel = (norm - sinc(1.0 / b)) / sinc(1.0 / b);
        c.check(
            rel.abs() <= 0.05,
            format!("b={b}: normalized {norm:.4} vs {:.4} ({:+.1}%)", sinc(1.0 / b), 100.0 * rel),
        );
    }
    Ok(c.finish())
}

fn msr_law(s: &Settings) -> Result<(bool, String)> {
    let d = dp(1.0, 0.1);
    let ch = baseline_channel();
    let spec = QuadratureSpec::default();
    let mut c = Checks::new();
    for i in 1..=3u32 {
        let trials = if i == 1 { 100_000 } else { 20_000 };
        let cfg = ExperimentConfig {
            densities: d,
            channel: ch,
            edge_rule: EdgeRule::Baseline,
            window: probe_window(d, i)?,
            trials: s.trials(trials),
            master_seed: s.seed_for(8, &[u64::from(i)]),
        };
        let mut rates = sample_msr(&cfg, i as usize)?;
        let exist = SummaryStats::proportion(rates.iter().filter(|&&r| r > 0.0).count(), rates.len());
        let z = exist.z_to(p_exist(i, d));
        c.check(z <= 3.0, format!("i={i}: P(R>0) {} vs {:.4} (z {z:.2})", pm(&exist), p_exist(i, d)));
        if i == 1 {
            rates.sort_by(f64::total_cmp);
            let top = *rates.last().expect("trials >= 1");
            let n = rates.len() as f64;
            let steps = (top / 0.005).ceil() as usize + 1;
            let mut sup = 0.0f64;
            let mut below = 0usize;
            for k in 0..=steps {
                let rho = k as f64 * 0.005;
                while below < rates.len() && rates[below] <= rho {
                    below += 1;
                }
                let f = msr_cdf(rho, i, d, ch.gain.b, ch.snr_ell(), &spec)?;
                sup = sup.max((below as f64 / n - f).abs());
            }
            c.check(sup < 0.01, format!("CDF sup distance {sup:.4} over {} draws", rates.len()));
        }
    }
    Ok(c.finish())
}

const PERCOLATION_GRID: [f64; 12] = [1.0, 2.0, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0];

fn percolation_table(s: &Settings, id: u8, rate: f64, half_sides: &[f64]) -> Result<PercolationTable> {
    let d = dp(PERCOLATION_GRID[0], 1.0);
    let ch = ChannelParams::path_loss_only(10.0, 2.0, rate)?;
    // seeds do not depend on the rate, so curves share node sets
    let cfg = ExperimentConfig::new(d, ch, EdgeRule::Threshold, half_sides[0], s.trials(200), s.seed_for(id, &[]))?;
    let mut cfg = cfg;
    cfg.window = Window::new(half_sides[0], cfg.window.guard_margin())?;
    estimate_percolation(&cfg, &PERCOLATION_GRID, half_sides)
}

fn ordered(table: &PercolationTable) -> bool {
    table.points.chunks(4).all(|chunk| {
        let hits = |k: ComponentKind| chunk.iter().find(|p| p.kind == k).map_or(0, |p| p.hits);
        let (o, i, w, st) = (
            hits(ComponentKind::Out),
            hits(ComponentKind::In),
            hits(ComponentKind::Weak),
            hits(ComponentKind::Strong),
        );
        st <= o && st <= i && o <= w && i <= w
    })
}

fn percolation(s: &Settings) -> Result<(bool, String)> {
    let ladder = [10.0, 20.0, 40.0];
    let table = percolation_table(s, 9, 0.0, &ladder)?;
    let mut c = Checks::new();
    c.check(ordered(&table), "component ordering at every point".into());
    for &half in &ladder {
        for (kind, target, tol) in [(ComponentKind::Weak, 3.4, 0.6), (ComponentKind::Strong, 6.2, 1.0)] {
            let curve = table.curve(kind, half);
            let cd = critical_density(&curve, 0.5, 1000, s.seed_for(9, &[half as u64]));
            let onset = curve.iter().find(|p| p.estimate.mean >= 0.05).map(|p| p.lambda_ell);
            let text = format!(
                "{} h={half}: crossing {} ci {} (first grid point with p>=0.05: {})",
                kind.label(),
                cd.estimate.map_or("none".into(), |v| format!("{v:.2}")),
                cd.ci95.map_or("none".into(), |(a, b)| format!("[{a:.2}, {b:.2}]")),
                onset.map_or("none".into(), |v| format!("{v}")),
            );
            if half == ladder[ladder.len() - 1] {
                let ok = cd.estimate.is_some_and(|v| (v - target).abs() <= tol);
                c.check(ok, format!("{text}, target {target}+-{tol}"));
            } else {
                c.note(text);
            }
        }
    }
    Ok(c.finish())
}

fn threshold_percolation(s: &Settings) -> Result<(bool, String)> {
    let ladder = [10.0, 20.0];
    let at0 = percolation_table(s, 10, 0.0, &ladder)?;
    let at1 = percolation_table(s, 10, 1.0, &ladder)?;
    let mut c = Checks::new();
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for &half in &ladder {
        let (a, b) = (at0.curve(ComponentKind::Weak, half), at1.curve(ComponentKind::Weak, half));
        for (p0, p1) in a.iter().zip(&b) {
            let se = p0.estimate.std_error.hypot(p1.estimate.std_error);
            let excess = p1.estimate.mean - p0.estimate.mean;
            worst = worst.max(excess);
            all &= excess <= 3.0 * se;
        }
    }
    c.check(all, format!("largest rate-1 excess over rate-0 {worst:+.3}"));
    Ok(c.finish())
}

fn full_connectivity(s: &Settings) -> Result<(bool, String)> {
    let mut c = Checks::new();
    let mut prev: Option<SummaryStats> = None;
    let mut last = None;
    for (k, lambda_ell) in [5.0, 20.0, 80.0].into_iter().enumerate() {
        let d = dp(lambda_ell, 1.0);
        let cfg = ExperimentConfig::new(d, baseline_channel(), EdgeRule::Baseline, 0.5, s.trials(400), s.seed_for(11, &[k as u64]))?;
        let fc = estimate_full_connectivity(&cfg, 1.0)?;
        if let Some(p) = prev {
            let se = p.std_error.hypot(fc.p_out_con.std_error);
            c.check(
                fc.p_out_con.mean >= p.mean - 3.0 * se,
                format!("p_out_con at {lambda_ell}: {}", pm(&fc.p_out_con)),
            );
        } else {
            c.note(format!("p_out_con at {lambda_ell}: {}", pm(&fc.p_out_con)));
        }
        prev = Some(fc.p_out_con);
        last = Some(fc);
    }
    let fc = last.expect("three points");
    c.check(fc.p_out_con.mean >= 0.9, format!("top p_out_con {:.3} >= 0.9", fc.p_out_con.mean));
    let bound = in_conn_upper_bound(1.0, 1.0);
    c.check(
        fc.p_in_con.mean <= bound + 3.0 * fc.p_in_con.std_error,
        format!("p_in_con at 80: {} <= {bound:.4} + 3se", pm(&fc.p_in_con)),
    );
    Ok(c.finish())
}

fn determinism(s: &Settings) -> Result<(bool, String)> {
    let mut cfg = Config {
        seed: s.seed,
        ..Config::default()
    };
    cfg.window.interior_half_side = 4.0;
    cfg.degrees.trials = 8;
    cfg.percolation.lambda_ell_grid = vec![2.0, 4.0, 6.0];
    cfg.percolation.half_sides = vec![4.0, 6.0];
    cfg.percolation.trials = 8;
    cfg.percolation.bootstrap_resamples = 50;
    let digest = cfg.digest();
    let render = |workers: usize| -> Result<Vec<u8>> {
        let tables = with_workers(Some(workers), || -> Result<Vec<Table>> {
            let mut t = tables::degrees(&cfg)?;
            t.extend(tables::percolation(&cfg)?);
            Ok(t)
        })??;
        let mut out = Vec::new();
        for t in &tables {
            out.extend(t.to_csv(&digest)?);
        }
        Ok(out)
    };
    let one = render(1)?;
    let many = render(4)?;
    let mut c = Checks::new();
    c.check(one == many, format!("{} CSV bytes identical for 1 and 4 workers", one.len()));
    Ok(c.finish())
}

type Runner = fn(&Settings) -> Result<(bool, String)>;

const RUNNERS: [Runner; 12] = [
    degree_law,
    isolation,
    fading,
    threshold,
    sectorization,
    neutralization,
    collusion,
    msr_law,
    percolation,
    threshold_percolation,
    full_connectivity,
    determinism,
];

/// Run criterion `id` (1 to 12).
pub fn run_criterion(id: u8, settings: &Settings) -> Result<CriterionResult> {
    assert!((1..=12).contains(&id), "criterion ids run from 1 to 12");
    let start = Instant::now();
    let (passed, detail) = RUNNERS[id as usize - 1](settings)?;
    Ok(CriterionResult {
        id,
        title: TITLES[id as usize - 1],
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run every criterion in order, calling `progress` after each.
pub fn run_all(settings: &Settings, mut progress: impl FnMut(&CriterionResult)) -> Result<Vec<CriterionResult>> {
    (1..=12)
        .map(|id| {
            let r = run_criterion(id, settings)?;
            progress(&r);
            Ok(r)
        })
        .collect()
}

const TABLE_HEADER: [&str; 4] = ["criterion", "title", "passed", "detail"];

pub fn table(results: &[CriterionResult]) -> Table {
    Table {
        name: "validation.csv".into(),
        header: TABLE_HEADER.to_vec(),
        rows: results
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.id.into()),
                    r.title.into(),
                    r.passed.into(),
                    r.detail.clone().into(),
                ]
            })
            .collect(),
    }
}

/// Whether every row of a [`table`] passed.
pub fn table_passes(t: &Table) -> bool {
    t.rows.iter().all(|row| row.get(2) == Some(&Cell::Bool(true)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_criterion_passes() {
        let r = run_criterion(12, &Settings::default()).unwrap();
        assert!(r.passed, "{}", r.detail);
        assert!(r.line().starts_with("[PASS] 12"));
    }

    #[test]
    fn table_reports_failures() {
        let mut r = CriterionResult {
            id: 1,
            title: TITLES[0],
            passed: true,
            detail: "x".into(),
            seconds: 0.0,
        };
        assert!(table_passes(&table(&[r.clone()])));
        r.passed = false;
        assert!(!table_passes(&table(&[r])));
    }

}
