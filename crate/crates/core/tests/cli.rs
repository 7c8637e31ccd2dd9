use std::fs;
use std::path::Path;

use isgraph::cli::{main_from_args, EXIT_CONFIG};

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["isgraph"];
    full.extend(args);
    main_from_args(full)
}

fn small_degrees(out: &Path, trials: &str, extra: &[&str]) -> i32 {
    let out = out.to_str().unwrap();
    let mut args = vec![
        "degrees",
        "--out",
        out,
        "--trials",
        trials,
        "--set",
        "window.interior_half_side=4",
    ];
    args.extend(extra);
    run(&args)
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn malformed_config_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[degrees]\nlambda_e = \"lots\"\n").unwrap();
    let out = dir.path().join("out");
    let code = run(&["degrees", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());

    let code = run(&["degrees", "--set", "degrees.lambda_e=-1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    let code = run(&["degrees", "--set", "degrees.no_such_key=1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]), EXIT_CONFIG);
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(small_degrees(&a, "6", &["--workers", "1"]), 0);
    assert_eq!(small_degrees(&b, "6", &["--workers", "3"]), 0);
    for name in ["degrees_summary.csv", "degree_pmf.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(a.join("manifest.json").exists());

    let c = dir.path().join("c");
    assert_eq!(small_degrees(&c, "6", &["--seed", "2"]), 0);
    assert_ne!(
        fs::read(a.join("degree_pmf.csv")).unwrap(),
        fs::read(c.join("degree_pmf.csv")).unwrap()
    );
}

#[test]
fn degrees_summary_matches_density_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    assert_eq!(small_degrees(&out, "20", &[]), 0);
    let csv = fs::read_to_string(out.join("degrees_summary.csv")).unwrap();
    let mean: f64 = column(&csv, "mean_out")[0].parse().unwrap();
    let se: f64 = column(&csv, "mean_out_se")[0].parse().unwrap();
    assert!((mean - 2.5).abs() < 4.0 * se, "{mean} +- {se}");
    let digest = &column(&csv, "config_digest")[0];
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_digest"].as_str().unwrap(), digest);
    assert_eq!(manifest["subcommand"], "degrees");
}

#[test]
fn every_sweep_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str], &[&str])] = &[
        ("isolation", &["--trials", "3", "--set", "window.interior_half_side=4", "--set", "isolation.voronoi_cells=50"], &["isolation.csv"]),
        ("msr", &["--trials", "500", "--set", "msr.neighbors=[1,2]"], &["msr_outage.csv", "msr_exist.csv"]),
        ("enhance", &["--trials", "2", "--set", "window.interior_half_side=3"], &["enhance.csv"]),
        ("collude", &["--trials", "2", "--set", "window.interior_half_side=3"], &["collude.csv"]),
        (
            "percolation",
            &["--trials", "4", "--set", "percolation.lambda_ell_grid=[2,6]", "--set", "percolation.half_sides=[3,4]", "--set", "percolation.bootstrap_resamples=20"],
            &["percolation.csv", "percolation_critical.csv"],
        ),
        ("fullconn", &["--trials", "5", "--set", "fullconn.lambda_ell_grid=[5,10]"], &["fullconn.csv"]),
    ];
    for (cmd, extra, files) in cases {
        let out = dir.path().join(cmd);
        let mut args = vec![*cmd, "--out", out.to_str().unwrap()];
        args.extend(*extra);
        assert_eq!(run(&args), 0, "{cmd}");
        for f in *files {
            let text = fs::read_to_string(out.join(f)).unwrap();
            assert!(text.starts_with("config_digest,"), "{cmd}/{f}");
            assert!(text.lines().count() > 1, "{cmd}/{f}");
        }
    }
}

#[test]
fn validate_rejects_trials_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    assert_eq!(run(&["validate", "--trials", "3", "--out", out.to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(run(&["degrees", "--workers", "0", "--out", out.to_str().unwrap()]), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn shipped_config_spells_out_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(isgraph::cli::config::parse(&text, &[]).unwrap(), isgraph::cli::Config::default());
}
