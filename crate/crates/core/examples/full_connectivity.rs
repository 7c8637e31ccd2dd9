//! Chance that the probe securely reaches, or is reached by, every node in
//! a unit square around it.

use isgraph::analytic::{in_conn_upper_bound, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_full_connectivity, ExperimentConfig};

fn main() -> isgraph::Result<()> {
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    for lambda_ell in [5.0, 20.0, 80.0] {
        let d = DensityPair::new(lambda_ell, 1.0)?;
        let cfg = ExperimentConfig::new(d, ch, EdgeRule::Baseline, 1.0, 200, 4)?;
        let fc = estimate_full_connectivity(&cfg, 1.0)?;
        println!("lambda_ell {lambda_ell:>4}: out {:.3}, in {:.3} (in bound {:.3})",
            fc.p_out_con.mean, fc.p_in_con.mean, in_conn_upper_bound(1.0, 1.0));
    }
    Ok(())
}
