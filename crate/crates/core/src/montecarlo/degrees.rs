use super::{run_trials, sample_trial, ExperimentConfig};
use crate::graph::{build, degrees};
use crate::stats::{Cluster, SummaryStats};
use crate::{Error, Result};

/// Counts of interior nodes by degree value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeHistogram {
    pub in_counts: Vec<u64>,
    pub out_counts: Vec<u64>,
}

impl DegreeHistogram {
    fn bump(counts: &mut Vec<u64>, k: usize) {
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }

    pub fn push(&mut self, in_degree: usize, out_degree: usize) {
        Self::bump(&mut self.in_counts, in_degree);
        Self::bump(&mut self.out_counts, out_degree);
    }

    pub fn nodes(&self) -> u64 {
        self.out_counts.iter().sum()
    }

    /// Empirical out-degree PMF.
    pub fn out_pmf(&self) -> Vec<f64> {
        let n = self.nodes() as f64;
        self.out_counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Empirical in-degree PMF.
    pub fn in_pmf(&self) -> Vec<f64> {
        let n = self.nodes() as f64;
        self.in_counts.iter().map(|&c| c as f64 / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeEstimate {
    pub histogram: DegreeHistogram,
    pub mean_in: SummaryStats,
    pub mean_out: SummaryStats,
    /// `E[N_in^2]`.
    pub in_second_moment: SummaryStats,
    pub p_in_isol: SummaryStats,
    pub p_out_isol: SummaryStats,
    pub interior_nodes: usize,
    /// Out-degree counts of each trial, for tests that account for the
    /// correlation between nodes of one trial.
    pub per_trial_out: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolationEstimate {
    pub p_in_isol: SummaryStats,
    pub p_out_isol: SummaryStats,
}

struct TrialDegrees {
    pairs: Vec<(usize, usize)>,
    eavesdroppers: usize,
}

/// In- and out-degrees of the interior nodes of each trial.
fn trial_degrees(cfg: &ExperimentConfig) -> Result<Vec<TrialDegrees>> {
    cfg.validate()?;
    run_trials(cfg.trials, |t| {
        let s = sample_trial(cfg.master_seed, &[t], cfg.densities, cfg.window, false)?;
        let g = build(&cfg.edge_rule, &cfg.channel, &s.legit, &s.eves, s.graph_seed)?;
        let pairs = degrees(&g)
            .into_iter()
            .zip(&s.legit.points)
            .filter(|(_, &p)| cfg.window.is_interior(p))
            .map(|(d, _)| d)
            .collect();
        Ok(TrialDegrees {
            pairs,
            eavesdroppers: s.eves.len(),
        })
    })
}

/// Degree histogram and moments over the interior nodes of all trials.
/// Standard errors treat trials, not nodes, as independent units.
pub fn estimate_degrees(cfg: &ExperimentConfig) -> Result<DegreeEstimate> {
    let trials = trial_degrees(cfg)?;
    if trials.iter().all(|t| t.eavesdroppers == 0) {
        return Err(Error::DegenerateWindow);
    }
    let mut histogram = DegreeHistogram::default();
    let mut per_trial: Vec<[Cluster; 5]> = Vec::with_capacity(trials.len());
    let mut per_trial_out = Vec::with_capacity(trials.len());
    for t in &trials {
        let mut own = DegreeHistogram::default();
        let mut c = [Cluster::new(), Cluster::new(), Cluster::new(), Cluster::binary(), Cluster::binary()];
        for &(din, dout) in &t.pairs {
            histogram.push(din, dout);
            own.push(din, dout);
            c[0].push(din as f64);
            c[1].push(dout as f64);
            c[2].push((din * din) as f64);
            c[3].push(f64::from(u8::from(din == 0)));
            c[4].push(f64::from(u8::from(dout == 0)));
        }
        per_trial.push(c);
        per_trial_out.push(own.out_counts);
    }
    let interior_nodes = histogram.nodes() as usize;
    if interior_nodes == 0 {
        return Err(Error::DegenerateWindow);
    }
    let stat = |k: usize| {
        let cs: Vec<Cluster> = per_trial.iter().map(|c| c[k]).collect();
        SummaryStats::from_clusters(&cs)
    };
    Ok(DegreeEstimate {
        mean_in: stat(0),
        mean_out: stat(1),
        in_second_moment: stat(2),
        p_in_isol: stat(3),
        p_out_isol: stat(4),
        histogram,
        interior_nodes,
        per_trial_out,
    })
}

/// Fractions of interior nodes with no incoming / no outgoing edges.
pub fn estimate_isolation(cfg: &ExperimentConfig) -> Result<IsolationEstimate> {
    let d = estimate_degrees(cfg)?;
    Ok(IsolationEstimate {
        p_in_isol: d.p_in_isol,
        p_out_isol: d.p_out_isol,
    })
}
