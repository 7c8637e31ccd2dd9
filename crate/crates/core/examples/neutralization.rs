//! Clearing eavesdroppers near legitimate nodes, against the lower bound.

use isgraph::analytic::{avg_degree_neutralized_lb, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_degrees, ExperimentConfig};

fn main() -> isgraph::Result<()> {
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    for lambda_e in [0.5, 1.0, 2.0] {
        let d = DensityPair::new(1.0, lambda_e)?;
        for radius in [0.0, 0.25, 0.5, 1.0] {
            let cfg = ExperimentConfig::new(d, ch, EdgeRule::Neutralized { radius }, 6.0, 20, 3)?;
            let mc = estimate_degrees(&cfg)?.mean_out;
            let lb = avg_degree_neutralized_lb(d, radius);
            println!("lambda_e {lambda_e} radius {radius}: {:.3} +- {:.3}, bound {lb:.3}", mc.mean, mc.std_error);
        }
    }
    Ok(())
}
