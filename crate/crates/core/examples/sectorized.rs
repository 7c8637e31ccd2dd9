//! Sectorized transmission multiplies the mean out-degree by the sector count.

use isgraph::analytic::{avg_degree_sectorized, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_degrees, ExperimentConfig};

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 1.0)?;
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    for sectors in [1, 2, 4, 8] {
        let cfg = ExperimentConfig::new(d, ch, EdgeRule::Sectorized { sectors }, 6.0, 20, sectors as u64)?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        println!("{sectors} sectors: {:.3} +- {:.3} (expected {})", mc.mean, mc.std_error, avg_degree_sectorized(d, sectors));
    }
    Ok(())
}
