//! Out-degree histogram against the geometric law.

use isgraph::analytic::{avg_degree, out_degree_pmf, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_degrees, ExperimentConfig};
use isgraph::stats::chi2_gof_clustered;

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 0.4)?;
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    let cfg = ExperimentConfig::new(d, ch, EdgeRule::Baseline, 8.0, 20, 1)?;
    let est = estimate_degrees(&cfg)?;

    println!("{} interior nodes", est.interior_nodes);
    println!("mean out {:.3} +- {:.3}, mean in {:.3} +- {:.3}, expected {}",
        est.mean_out.mean, est.mean_out.std_error, est.mean_in.mean, est.mean_in.std_error, avg_degree(d));
    println!(" n   observed  expected");
    for (n, p) in est.histogram.out_pmf().iter().enumerate().take(10) {
        println!("{n:2}   {p:.4}    {:.4}", out_degree_pmf(n as u64, d));
    }
    let chi = chi2_gof_clustered(&est.per_trial_out, |k| out_degree_pmf(k as u64, d));
    println!("chi-square {:.2} on {} dof, design effect {:.2}, adjusted p {:.3}",
        chi.raw.statistic, chi.raw.dof, chi.design_effect, chi.adjusted.p_value);
    Ok(())
}
