//! Probability that the probe's component reaches the window boundary, and
//! where that probability crosses one half.

use isgraph::analytic::DensityPair;
use isgraph::channel::ChannelParams;
use isgraph::graph::{ComponentKind, EdgeRule};
use isgraph::montecarlo::{critical_density, estimate_percolation, ExperimentConfig};

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 1.0)?;
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    let cfg = ExperimentConfig::new(d, ch, EdgeRule::Baseline, 1.0, 60, 9)?;
    let grid = [2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0];
    let table = estimate_percolation(&cfg, &grid, &[5.0, 10.0])?;
    for kind in [ComponentKind::Weak, ComponentKind::Out, ComponentKind::In, ComponentKind::Strong] {
        for half in [5.0, 10.0] {
            let curve = table.curve(kind, half);
            let probs: Vec<String> = curve.iter().map(|p| format!("{:.2}", p.estimate.mean)).collect();
            let c = critical_density(&curve, 0.5, 200, 1);
            let at = c.estimate.map_or("none".to_string(), |x| format!("{x:.2}"));
            println!("{:>6} half-side {half:>4}: [{}] crosses 1/2 at {at}", kind.label(), probs.join(" "));
        }
    }
    Ok(())
}
