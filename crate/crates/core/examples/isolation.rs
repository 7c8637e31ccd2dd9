//! Isolation probabilities across density ratios, with the in-isolation
//! value computed from sampled Voronoi cell areas.

use isgraph::analytic::{p_in_isol_from_cells, p_out_isol, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_isolation, ExperimentConfig};
use isgraph::spatial::VoronoiSampler;

fn main() -> isgraph::Result<()> {
    let cells = VoronoiSampler::default().sample_many(3, 500)?;
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    println!("ratio   p_out mc / exact     p_in mc / voronoi");
    for (k, lambda_e) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let d = DensityPair::new(1.0, lambda_e)?;
        let cfg = ExperimentConfig::new(d, ch, EdgeRule::Baseline, 6.0, 20, 10 + k as u64)?;
        let est = estimate_isolation(&cfg)?;
        let vor = p_in_isol_from_cells(d, &cells)?;
        println!("{lambda_e:5}   {:.4} / {:.4}     {:.4} / {:.4}",
            est.p_out_isol.mean, p_out_isol(d), est.p_in_isol.mean, vor.mean);
    }
    Ok(())
}
