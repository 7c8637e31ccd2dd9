//! Colluding eavesdroppers shrink the mean degree by sinc(1/b).

use isgraph::analytic::{avg_degree, avg_degree_colluding, sinc, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::{CollusionTail, EdgeRule};
use isgraph::montecarlo::{estimate_degrees, ExperimentConfig};

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 0.1)?;
    let rule = EdgeRule::Colluding { tail: CollusionTail::MeanField, allow_divergent: false };
    println!("   b   simulated        analytic   ratio / sinc(1/b)");
    for b in [1.5, 2.0, 3.0, 4.0] {
        let ch = ChannelParams::path_loss_only(10.0, b, 0.0)?;
        let cfg = ExperimentConfig::new(d, ch, rule.clone(), 6.0, 20, 5)?;
        let mc = estimate_degrees(&cfg)?.mean_out;
        println!("{b:4}   {:.3} +- {:.3}   {:7.3}   {:.3} / {:.3}",
            mc.mean, mc.std_error, avg_degree_colluding(d, b)?, mc.mean / avg_degree(d), sinc(1.0 / b));
    }
    Ok(())
}
