use super::{run_trials, sample_trial, ExperimentConfig};
use crate::graph::{build, component, ComponentKind};
use crate::stats::SummaryStats;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FullConnectivity {
    pub area: f64,
    /// Probe reaches every legitimate node of the region.
    pub p_out_con: SummaryStats,
    /// Every legitimate node of the region reaches the probe.
    pub p_in_con: SummaryStats,
    /// Legitimate nodes in the region per trial, excluding the probe.
    pub region_nodes: SummaryStats,
}

/// Full out- and in-connectivity of a probe at the origin with respect to
/// the square region of area `area` centred on it. The graph is built over
/// the whole window, so paths may leave the region.
pub fn estimate_full_connectivity(cfg: &ExperimentConfig, area: f64) -> Result<FullConnectivity> {
    cfg.validate()?;
    if !(area > 0.0) {
        return Err(Error::invalid(format!("region area {area} must be > 0")));
    }
    let half = area.sqrt() / 2.0;
    if half > cfg.window.half_side() {
        return Err(Error::invalid("region does not fit in the window"));
    }
    let inside = |p: crate::spatial::Point2| p.x.abs() <= half && p.y.abs() <= half;
    let events = run_trials(cfg.trials, |t| {
        let s = sample_trial(cfg.master_seed, &[t], cfg.densities, cfg.window, true)?;
        let g = build(&cfg.edge_rule, &cfg.channel, &s.legit, &s.eves, s.graph_seed)?;
        let region: Vec<usize> = (1..g.len()).filter(|&j| inside(g.positions()[j])).collect();
        let covers = |kind: ComponentKind| {
            let mut member = vec![false; g.len()];
            for j in component(&g, 0, kind) {
                member[j] = true;
            }
            region.iter().all(|&j| member[j])
        };
        Ok((covers(ComponentKind::Out), covers(ComponentKind::In), region.len()))
    })?;
    let n = events.len();
    let nodes: Vec<f64> = events.iter().map(|e| e.2 as f64).collect();
    Ok(FullConnectivity {
        area,
        p_out_con: SummaryStats::proportion(events.iter().filter(|e| e.0).count(), n),
        p_in_con: SummaryStats::proportion(events.iter().filter(|e| e.1).count(), n),
        region_nodes: SummaryStats::from_samples(&nodes),
    })
}
