use super::*;
use crate::analytic::{p_exist, p_out_isol};
use crate::channel::FadingModel;
use crate::graph::ComponentKind;

fn baseline(lambda_ell: f64, lambda_e: f64, interior: f64, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        DensityPair { lambda_ell, lambda_e },
        ChannelParams::path_loss_only(10.0, 2.0, 0.0).unwrap(),
        EdgeRule::Baseline,
        interior,
        trials,
        seed,
    )
    .unwrap()
}

#[test]
fn guard_margin_tracks_effective_density() {
    let d = DensityPair { lambda_ell: 1.0, lambda_e: 0.4 };
    let mut ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0).unwrap();
    let base = default_guard_margin(&EdgeRule::Baseline, d, &ch);
    assert!((base - Window::default_guard_margin(0.4)).abs() < 1e-12);
    let sect = default_guard_margin(&EdgeRule::Sectorized { sectors: 4 }, d, &ch);
    assert!((sect - 2.0 * base).abs() < 1e-9);
    ch.fading = FadingModel::Rayleigh;
    assert!(default_guard_margin(&EdgeRule::Fading, d, &ch) > base);
    let none = DensityPair { lambda_ell: 1.0, lambda_e: 0.0 };
    assert_eq!(default_guard_margin(&EdgeRule::Baseline, none, &ch), 0.0);
}

#[test]
fn degree_means_follow_density_ratio() {
    let cfg = baseline(1.0, 0.4, 6.0, 40, 1);
    let est = estimate_degrees(&cfg).unwrap();
    assert!(est.interior_nodes > 4000);
    assert!(est.mean_out.z_to(2.5) < 4.0, "{:?}", est.mean_out);
    assert!(est.mean_in.z_to(2.5) < 4.0, "{:?}", est.mean_in);
    assert!(est.p_out_isol.z_to(p_out_isol(cfg.densities)) < 4.0);
    assert!(est.p_in_isol.mean < est.p_out_isol.mean);
    assert_eq!(est.histogram.nodes() as usize, est.interior_nodes);
    let total: f64 = est.histogram.out_pmf().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = baseline(1.0, 0.4, 4.0, 16, 99);
    let one = with_workers(Some(1), || estimate_degrees(&cfg)).unwrap().unwrap();
    let many = with_workers(Some(4), || estimate_degrees(&cfg)).unwrap().unwrap();
    assert_eq!(one, many);
    let mut other = cfg.clone();
    other.master_seed = 100;
    assert_ne!(estimate_degrees(&other).unwrap().histogram, one.histogram);
    assert!(with_workers(Some(0), || ()).is_err());
}

#[test]
fn standard_error_shrinks_with_trials() {
    let a = estimate_degrees(&baseline(1.0, 0.4, 4.0, 100, 5)).unwrap();
    let b = estimate_degrees(&baseline(1.0, 0.4, 4.0, 200, 5)).unwrap();
    let ratio = b.mean_out.std_error / a.mean_out.std_error;
    assert!((ratio - 0.5f64.sqrt()).abs() < 0.2 * 0.5f64.sqrt(), "{ratio}");
}

#[test]
fn missing_eavesdroppers_are_degenerate() {
    let cfg = ExperimentConfig {
        window: Window::new(1.0, 0.5).unwrap(),
        ..baseline(1.0, 1e-9, 1.0, 3, 0)
    };
    assert!(matches!(estimate_degrees(&cfg), Err(crate::Error::DegenerateWindow)));
    let cfg = baseline(0.0, 1.0, 2.0, 3, 0);
    assert!(matches!(estimate_degrees(&cfg), Err(crate::Error::DegenerateWindow)));
}

#[test]
fn invalid_configs_rejected() {
    let d = DensityPair { lambda_ell: 1.0, lambda_e: 0.1 };
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0).unwrap();
    assert!(ExperimentConfig::new(d, ch, EdgeRule::Baseline, 3.0, 0, 0).is_err());
    let neg = DensityPair { lambda_ell: -1.0, lambda_e: 0.1 };
    assert!(ExperimentConfig::new(neg, ch, EdgeRule::Baseline, 3.0, 1, 0).is_err());
}

#[test]
fn outage_at_zero_rate_is_non_existence() {
    let cfg = baseline(1.0, 0.1, 2.0, 4000, 3);
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 1e3];
    let out1 = estimate_msr_outage(&cfg, 1, &grid).unwrap();
    let out3 = estimate_msr_outage(&cfg, 3, &grid).unwrap();
    let d = cfg.densities;
    assert!(out1.outage[0].z_to(1.0 - p_exist(1, d)) < 4.0);
    assert!(out3.exist.z_to(p_exist(3, d)) < 4.0);
    for k in 0..grid.len() {
        assert!(out1.outage[k].mean <= out3.outage[k].mean + 1e-12);
        if k > 0 {
            assert!(out1.outage[k].mean >= out1.outage[k - 1].mean);
        }
    }
    assert_eq!(out1.outage.last().unwrap().mean, 1.0);
    assert!(estimate_msr_outage(&cfg, 0, &grid).is_err());
}

#[test]
fn percolation_component_ordering() {
    let cfg = baseline(1.0, 1.0, 1.0, 30, 4);
    let table = estimate_percolation(&cfg, &[1.0, 4.0, 8.0], &[4.0, 6.0]).unwrap();
    assert_eq!(table.points.len(), 3 * 2 * 4);
    for chunk in table.points.chunks(4) {
        let p = |k: ComponentKind| chunk.iter().find(|p| p.kind == k).unwrap().hits;
        assert!(p(ComponentKind::Strong) <= p(ComponentKind::Out));
        assert!(p(ComponentKind::Strong) <= p(ComponentKind::In));
        assert!(p(ComponentKind::Out) <= p(ComponentKind::Weak));
        assert!(p(ComponentKind::In) <= p(ComponentKind::Weak));
    }
    assert_eq!(table.largest_half_side(), Some(6.0));
    assert_eq!(table.curve(ComponentKind::Weak, 6.0).len(), 3);
    assert!(estimate_percolation(&cfg, &[1.0], &[4.0]).is_err());
}

fn synthetic_point(lambda_ell: f64, hits: usize, trials: usize) -> PercolationPoint {
    PercolationPoint {
        lambda_ell,
        half_side: 10.0,
        kind: ComponentKind::Weak,
        hits,
        trials,
        estimate: crate::stats::SummaryStats::proportion(hits, trials),
    }
}

#[test]
fn critical_density_of_a_step_curve() {
    let pts: Vec<PercolationPoint> = [(1.0, 0), (2.0, 10), (3.0, 40), (4.0, 150), (5.0, 190), (6.0, 200)]
        .iter()
        .map(|&(l, h)| synthetic_point(l, h, 200))
        .collect();
    let refs: Vec<&PercolationPoint> = pts.iter().collect();
    let c = critical_density(&refs, 0.5, 400, 11);
    let est = c.estimate.unwrap();
    assert!((est - 3.545_454_545).abs() < 1e-6, "{est}");
    let (lo, hi) = c.ci95.unwrap();
    assert!(lo < est && est < hi && hi - lo < 0.5);
    assert_eq!(c, critical_density(&refs, 0.5, 400, 11));
    let flat: Vec<PercolationPoint> = (0..4).map(|i| synthetic_point(i as f64, 0, 50)).collect();
    let refs: Vec<&PercolationPoint> = flat.iter().collect();
    assert_eq!(critical_density(&refs, 0.5, 50, 1).estimate, None);
}

#[test]
fn no_eavesdroppers_means_full_connectivity() {
    let cfg = ExperimentConfig {
        window: Window::new(1.5, 0.0).unwrap(),
        ..baseline(5.0, 0.0, 1.0, 20, 2)
    };
    let fc = estimate_full_connectivity(&cfg, 1.0).unwrap();
    assert_eq!(fc.p_out_con.mean, 1.0);
    assert_eq!(fc.p_in_con.mean, 1.0);
    assert!(estimate_full_connectivity(&cfg, 100.0).is_err());
}

#[test]
fn identical_fading_models_give_identical_histograms() {
    let cfg = baseline(1.0, 0.4, 3.0, 10, 8);
    let report = fading_invariance_test(&cfg, &[FadingModel::Deterministic, FadingModel::Deterministic], 0.01).unwrap();
    assert_eq!(report.estimates[0], report.estimates[1]);
    assert_eq!(report.comparisons[0].out_degree.raw.statistic, 0.0);
    assert!(report.passes());
}

#[test]
fn probe_window_holds_the_needed_points() {
    let d = DensityPair { lambda_ell: 1.0, lambda_e: 0.1 };
    let w1 = probe_window(d, 1).unwrap();
    // nearest eavesdropper dominates: pi 0.1 r^2 = ln 1e9
    let r = (1e9f64.ln() / (std::f64::consts::PI * 0.1)).sqrt();
    assert!((w1.half_side() - r).abs() / r < 0.03, "{w1:?}");
    let dense_eves = DensityPair { lambda_ell: 0.1, lambda_e: 10.0 };
    assert!(probe_window(dense_eves, 5).unwrap().half_side() > probe_window(dense_eves, 1).unwrap().half_side());
    assert!(probe_window(DensityPair { lambda_ell: 1.0, lambda_e: 0.0 }, 1).is_err());
}
