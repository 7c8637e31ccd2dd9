use super::{estimate_degrees, DegreeEstimate, ExperimentConfig};
use crate::channel::FadingModel;
use crate::graph::EdgeRule;
use crate::stats::{chi2_homogeneity_clustered, ClusteredChiSquare};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FadingComparison {
    pub first: usize,
    pub second: usize,
    /// Two-sample test of the out-degree histograms, corrected for
    /// correlation within trials.
    pub out_degree: ClusteredChiSquare,
    /// Standard errors separating the mean in-degrees.
    pub mean_in_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingInvarianceReport {
    pub models: Vec<FadingModel>,
    pub estimates: Vec<DegreeEstimate>,
    pub comparisons: Vec<FadingComparison>,
    pub significance: f64,
}

impl FadingInvarianceReport {
    pub fn comparison_passes(&self, c: &FadingComparison) -> bool {
        c.out_degree.passes(self.significance) && c.mean_in_z <= 3.0
    }

    pub fn passes(&self) -> bool {
        self.comparisons.iter().all(|c| self.comparison_passes(c))
    }
}

/// Degree statistics under each fading model, compared pairwise.
///
/// Every model sees the same node positions (same master seed and window),
/// only the fading draws differ. Choose `cfg.window` wide enough for the
/// heaviest-tailed model.
pub fn fading_invariance_test(
    cfg: &ExperimentConfig,
    models: &[FadingModel],
    significance: f64,
) -> Result<FadingInvarianceReport> {
    if models.len() < 2 {
        return Err(Error::invalid("need at least two fading models to compare"));
    }
    let estimates = models
        .iter()
        .map(|&m| {
            let mut c = cfg.clone();
            c.channel.fading = m;
            c.edge_rule = EdgeRule::Fading;
            estimate_degrees(&c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut comparisons = Vec::new();
    for a in 0..models.len() {
        for b in a + 1..models.len() {
            comparisons.push(FadingComparison {
                first: a,
                second: b,
                out_degree: chi2_homogeneity_clustered(&estimates[a].per_trial_out, &estimates[b].per_trial_out),
                mean_in_z: estimates[a].mean_in.z_diff(&estimates[b].mean_in),
            });
        }
    }
    Ok(FadingInvarianceReport {
        models: models.to_vec(),
        estimates,
        comparisons,
        significance,
    })
}
