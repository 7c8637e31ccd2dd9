//! Mean degree under a secrecy rate threshold: quadrature against simulation.

use isgraph::analytic::{avg_degree_threshold, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_degrees, ExperimentConfig};
use isgraph::quadrature::QuadratureSpec;

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 0.1)?;
    let spec = QuadratureSpec::default();
    println!("rate   analytic   simulated");
    for (k, rate) in [0.0, 0.5, 1.0, 2.0, 3.0].into_iter().enumerate() {
        let ch = ChannelParams::path_loss_only(10.0, 2.0, rate)?;
        let q = avg_degree_threshold(d, &ch, &spec)?;
        let cfg = ExperimentConfig::new(d, ch, EdgeRule::Threshold, 6.0, 20, 40 + k as u64)?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        println!("{rate:4}   {q:8.4}   {:.4} +- {:.4}", mc.mean, mc.std_error);
    }
    Ok(())
}
