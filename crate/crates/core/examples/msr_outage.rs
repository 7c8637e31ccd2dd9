//! Outage probability of the maximum secrecy rate to the i-th nearest neighbour.

use isgraph::analytic::{msr_cdf, p_exist, DensityPair};
use isgraph::channel::ChannelParams;
use isgraph::graph::EdgeRule;
use isgraph::montecarlo::{estimate_msr_outage, probe_window, ExperimentConfig};
use isgraph::quadrature::QuadratureSpec;

fn main() -> isgraph::Result<()> {
    let d = DensityPair::new(1.0, 0.1)?;
    let ch = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    let grid = [0.0, 1.0, 2.0, 3.0, 4.0, 6.0];
    let spec = QuadratureSpec::default();
    for i in 1..=3u32 {
        let cfg = ExperimentConfig {
            densities: d,
            channel: ch,
            edge_rule: EdgeRule::Baseline,
            window: probe_window(d, i)?,
            trials: 20_000,
            master_seed: i as u64,
        };
        let out = estimate_msr_outage(&cfg, i as usize, &grid)?;
        println!("neighbour {i}: P(rate > 0) {:.4} (exact {:.4})", out.exist.mean, p_exist(i, d));
        for (rho, o) in grid.iter().zip(&out.outage) {
            println!("  rate {rho}: outage {:.4} vs {:.4}", o.mean, msr_cdf(*rho, i, d, 2.0, 10.0, &spec)?);
        }
    }
    Ok(())
}
