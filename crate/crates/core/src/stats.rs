//! Estimators and tests used by the Monte Carlo harness.

use std::ops::Range;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo estimate with its standard error and a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
}

impl SummaryStats {
    fn normal(n: usize, mean: f64, std_error: f64) -> Self {
        Self {
            n,
            mean,
            std_error,
            ci95: (mean - Z95 * std_error, mean + Z95 * std_error),
        }
    }

    /// Mean of independent samples.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::normal(0, 0.0, 0.0);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self::normal(n, mean, se)
    }

    /// Binomial proportion. The interval is the normal approximation, or
    /// the Wilson score interval when fewer than 10 successes or failures.
    pub fn proportion(successes: usize, n: usize) -> Self {
        if n == 0 {
            return Self::normal(0, 0.0, 0.0);
        }
        let p = successes as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let mut s = Self::normal(n, p, se);
        if successes.min(n - successes) < 10 {
            s.ci95 = wilson(p, n as f64);
        }
        s
    }

    /// Ratio estimator `sum(y) / sum(c)` over independent clusters (trials).
    ///
    /// Items inside a trial share the same point process and are not
    /// independent, so the standard error is the linearised cluster
    /// variance. With a single cluster it falls back to treating items as
    /// independent.
    pub fn from_clusters(clusters: &[Cluster]) -> Self {
        let total: f64 = clusters.iter().map(|c| c.count).sum();
        let n = total as usize;
        if total == 0.0 {
            return Self::normal(0, 0.0, 0.0);
        }
        let mean = clusters.iter().map(|c| c.sum).sum::<f64>() / total;
        let t = clusters.len() as f64;
        let se = if clusters.len() > 1 {
            let ss: f64 = clusters
                .iter()
                .map(|c| (c.sum - mean * c.count).powi(2))
                .sum();
            (t / (t - 1.0) * ss).sqrt() / total
        } else {
            let sumsq: f64 = clusters.iter().map(|c| c.sumsq).sum();
            let var = (sumsq / total - mean * mean).max(0.0) * total / (total - 1.0).max(1.0);
            (var / total).sqrt()
        };
        let mut s = Self::normal(n, mean, se);
        if clusters.iter().all(|c| c.is_binary) {
            let successes = (mean * total).round() as usize;
            if successes.min(n - successes.min(n)) < 10 {
                s.ci95 = wilson(mean, total);
            }
        }
        s
    }

    /// Number of standard errors separating two independent estimates.
    pub fn z_diff(&self, other: &SummaryStats) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        if se == 0.0 {
            if self.mean == other.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - other.mean).abs() / se
        }
    }

    /// Number of standard errors between the estimate and `value`.
    pub fn z_to(&self, value: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - value).abs() / self.std_error
        }
    }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if p == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if p == 1.0 { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Per-trial accumulator for [`SummaryStats::from_clusters`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cluster {
    pub sum: f64,
    pub sumsq: f64,
    pub count: f64,
    pub is_binary: bool,
}

impl Cluster {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn binary() -> Self {
        Self {
            is_binary: true,
            ..Self::default()
        }
    }

    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sumsq += x * x;
        self.count += 1.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    /// Degrees of freedom; fractional after a clustering correction.
    pub dof: f64,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn from_statistic(statistic: f64, dof: f64) -> Self {
        let p_value = if dof > 0.0 {
            ChiSquared::new(dof).expect("dof > 0").sf(statistic)
        } else {
            1.0
        };
        Self {
            statistic,
            dof,
            p_value,
        }
    }

    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Merge bins from the right until every bin has weight at least `min`.
fn merge_bins(weights: &[f64], min: f64) -> Vec<Range<usize>> {
    let mut ranges = Vec::new();
    let mut end = weights.len();
    let mut acc = 0.0;
    for i in (0..weights.len()).rev() {
        acc += weights[i];
        if acc >= min {
            ranges.push(i..end);
            end = i;
            acc = 0.0;
        }
    }
    if end > 0 {
        match ranges.last_mut() {
            Some(last) => last.start = 0,
            None => ranges.push(0..end),
        }
    }
    ranges.reverse();
    ranges
}

/// Expected probabilities of `0..len` plus an upper-tail bin, and the
/// merged bin ranges for `n` observations.
fn gof_bins(len: usize, n: f64, pmf: impl Fn(usize) -> f64) -> (Vec<f64>, Vec<Range<usize>>) {
    let mut probs: Vec<f64> = (0..len).map(&pmf).collect();
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    probs.push(tail);
    let expected: Vec<f64> = probs.iter().map(|p| p * n).collect();
    let bins = merge_bins(&expected, 5.0);
    (probs, bins)
}

fn bin_sum(v: &[u64], r: &Range<usize>) -> f64 {
    r.clone().map(|i| v.get(i).copied().unwrap_or(0) as f64).sum()
}

fn pool(clusters: &[Vec<u64>]) -> Vec<u64> {
    let mut out = vec![0u64; clusters.iter().map(Vec::len).max().unwrap_or(0)];
    for c in clusters {
        for (k, &v) in c.iter().enumerate() {
            out[k] += v;
        }
    }
    out
}

/// Goodness of fit of `observed[k]` (counts of value `k`) against the
/// probabilities `pmf(k)`, `k = 0, 1, ...`. The final bin collects the
/// upper tail; bins are merged so every expected count is at least 5.
pub fn chi2_gof(observed: &[u64], pmf: impl Fn(usize) -> f64) -> ChiSquareTest {
    let n = observed.iter().sum::<u64>() as f64;
    let (probs, bins) = gof_bins(observed.len(), n, pmf);
    let mut stat = 0.0;
    for r in &bins {
        let e: f64 = probs[r.clone()].iter().sum::<f64>() * n;
        if e > 0.0 {
            stat += (bin_sum(observed, r) - e).powi(2) / e;
        }
    }
    ChiSquareTest::from_statistic(stat, bins.len().saturating_sub(1) as f64)
}

/// Bins for a two-sample test, merged until the smaller sample expects at
/// least 5 per bin.
fn homogeneity_bins(a: &[u64], b: &[u64]) -> Vec<Range<usize>> {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let weights: Vec<f64> = (0..len)
        .map(|i| (get(a, i) + get(b, i)) * na.min(nb) / (na + nb))
        .collect();
    merge_bins(&weights, 5.0)
}

/// Two-sample chi-square test of homogeneity on count histograms.
pub fn chi2_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareTest {
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let total = na + nb;
    if na == 0.0 || nb == 0.0 {
        return ChiSquareTest::from_statistic(0.0, 0.0);
    }
    let bins = homogeneity_bins(a, b);
    let mut stat = 0.0;
    for r in &bins {
        let (oa, ob) = (bin_sum(a, r), bin_sum(b, r));
        let col = oa + ob;
        if col > 0.0 {
            let ea = col * na / total;
            let eb = col * nb / total;
            stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
        }
    }
    ChiSquareTest::from_statistic(stat, bins.len().saturating_sub(1) as f64)
}

/// A chi-square test on clustered counts with its second-order Rao-Scott
/// correction.
///
/// Nodes of one trial share a point process, so their degrees are
/// positively correlated and the plain Pearson statistic overstates the
/// evidence. The correction rescales the statistic and its degrees of
/// freedom by the first two moments of the design-effect eigenvalues,
/// estimated from the between-trial covariance of the bin fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusteredChiSquare {
    /// Pearson statistic on the pooled counts, as if items were independent.
    pub raw: ChiSquareTest,
    /// Mean design-effect eigenvalue.
    pub design_effect: f64,
    /// Squared coefficient of variation of the eigenvalues.
    pub dispersion: f64,
    pub adjusted: ChiSquareTest,
}

impl ClusteredChiSquare {
    fn unadjusted(raw: ChiSquareTest) -> Self {
        Self {
            raw,
            design_effect: 1.0,
            dispersion: 0.0,
            adjusted: raw,
        }
    }

    /// `tr1` and `tr2` are the traces of the design-effect matrix and of
    /// its square.
    fn new(raw: ChiSquareTest, tr1: f64, tr2: f64) -> Self {
        let k = raw.dof;
        if !(k > 0.0 && tr1 > 0.0 && tr2.is_finite()) {
            return Self::unadjusted(raw);
        }
        let mean = tr1 / k;
        let dispersion = (tr2 / (k * mean * mean) - 1.0).max(0.0);
        let scale = mean * (1.0 + dispersion);
        Self {
            raw,
            design_effect: mean,
            dispersion,
            adjusted: ChiSquareTest::from_statistic(raw.statistic / scale, k / (1.0 + dispersion)),
        }
    }

    pub fn passes(&self, significance: f64) -> bool {
        self.adjusted.passes(significance)
    }
}

/// Between-cluster covariance matrix of the pooled bin fractions.
fn bin_fraction_covariance(clusters: &[Vec<u64>], bins: &[Range<usize>]) -> Vec<Vec<f64>> {
    let kb = bins.len();
    let mut cov = vec![vec![0.0; kb]; kb];
    let t = clusters.len();
    let counts: Vec<Vec<f64>> = clusters
        .iter()
        .map(|c| bins.iter().map(|r| bin_sum(c, r)).collect())
        .collect();
    let sizes: Vec<f64> = counts.iter().map(|c| c.iter().sum()).collect();
    let n: f64 = sizes.iter().sum();
    if t < 2 || n == 0.0 {
        return cov;
    }
    let p: Vec<f64> = (0..kb).map(|k| counts.iter().map(|c| c[k]).sum::<f64>() / n).collect();
    for (c, &m) in counts.iter().zip(&sizes) {
        let e: Vec<f64> = (0..kb).map(|k| c[k] - p[k] * m).collect();
        for i in 0..kb {
            for j in 0..kb {
                cov[i][j] += e[i] * e[j];
            }
        }
    }
    let f = t as f64 / (t as f64 - 1.0) / (n * n);
    cov.iter_mut().flatten().for_each(|v| *v *= f);
    cov
}

/// Traces of `D` and `D^2` for `D = diag(1/p) cov / scale`, the
/// design-effect matrix against multinomial sampling with scaled variance.
fn design_traces(cov: &[Vec<f64>], p: &[f64], scale: f64) -> (f64, f64) {
    let mut tr1 = 0.0;
    let mut tr2 = 0.0;
    for i in 0..p.len() {
        if p[i] <= 0.0 {
            continue;
        }
        tr1 += cov[i][i] / p[i];
        for j in 0..p.len() {
            if p[j] > 0.0 {
                tr2 += cov[i][j] * cov[i][j] / (p[i] * p[j]);
            }
        }
    }
    (tr1 / scale, tr2 / (scale * scale))
}

/// [`chi2_gof`] on histograms collected per cluster (one per trial).
pub fn chi2_gof_clustered(clusters: &[Vec<u64>], pmf: impl Fn(usize) -> f64) -> ClusteredChiSquare {
    let pooled = pool(clusters);
    let raw = chi2_gof(&pooled, &pmf);
    let n = pooled.iter().sum::<u64>() as f64;
    let (probs, bins) = gof_bins(pooled.len(), n, &pmf);
    let p: Vec<f64> = bins.iter().map(|r| probs[r.clone()].iter().sum()).collect();
    let cov = bin_fraction_covariance(clusters, &bins);
    let (tr1, tr2) = design_traces(&cov, &p, 1.0 / n);
    ClusteredChiSquare::new(raw, tr1, tr2)
}

/// [`chi2_homogeneity`] on two independent sets of per-cluster histograms.
pub fn chi2_homogeneity_clustered(a: &[Vec<u64>], b: &[Vec<u64>]) -> ClusteredChiSquare {
    let (pa, pb) = (pool(a), pool(b));
    let raw = chi2_homogeneity(&pa, &pb);
    if raw.dof == 0.0 {
        return ClusteredChiSquare::unadjusted(raw);
    }
    let na = pa.iter().sum::<u64>() as f64;
    let nb = pb.iter().sum::<u64>() as f64;
    let bins = homogeneity_bins(&pa, &pb);
    let p: Vec<f64> = bins
        .iter()
        .map(|r| (bin_sum(&pa, r) + bin_sum(&pb, r)) / (na + nb))
        .collect();
    let (ca, cb) = (bin_fraction_covariance(a, &bins), bin_fraction_covariance(b, &bins));
    let cov: Vec<Vec<f64>> = ca
        .iter()
        .zip(&cb)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect();
    let (tr1, tr2) = design_traces(&cov, &p, 1.0 / na + 1.0 / nb);
    ClusteredChiSquare::new(raw, tr1, tr2)
}

/// Two-sample Kolmogorov-Smirnov statistic. Sorts its inputs in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS statistic.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Sup-distance between an empirical CDF and a reference CDF `f`.
pub fn ks_one_sample(samples: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let below = i as f64 / n;
        while i < samples.len() && samples[i] == x {
            i += 1;
        }
        let at = i as f64 / n;
        let fx = f(x);
        d = d.max((at - fx).abs()).max((fx - below).abs());
    }
    d
}

/// Weighted isotonic (non-decreasing) least-squares fit by pool adjacent
/// violators.
pub fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            let merged = if w > 0.0 { (v1 * w1 + v2 * w2) / w } else { (v1 + v2) / 2.0 };
            *blocks.last_mut().expect("two blocks") = (merged, w, n1 + n2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// First abscissa where the piecewise-linear curve through `(xs, ys)`
/// reaches `level`.
pub fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    if ys.first().is_some_and(|&y| y >= level) {
        return xs.first().copied();
    }
    for i in 1..xs.len() {
        let (y0, y1) = (ys[i - 1], ys[i]);
        if y0 < level && y1 >= level {
            let t = (level - y0) / (y1 - y0);
            return Some(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn summary_from_samples() {
        let s = SummaryStats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_relative_eq!(s.std_error, (5.0f64 / 3.0 / 4.0).sqrt());
        assert!(s.ci95.0 < s.mean && s.mean < s.ci95.1);
    }

    #[test]
    fn proportion_uses_wilson_for_rare_events() {
        let s = SummaryStats::proportion(0, 50);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.ci95.0, 0.0);
        assert!(s.ci95.1 > 0.0);
        let s = SummaryStats::proportion(500, 1000);
        assert_relative_eq!(s.std_error, (0.25f64 / 1000.0).sqrt());
        assert!(s.ci95.0 <= s.mean && s.mean <= s.ci95.1);
    }

    #[test]
    fn cluster_estimator_matches_iid_when_clusters_are_singletons() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let clusters: Vec<Cluster> = xs
            .iter()
            .map(|&x| {
                let mut c = Cluster::new();
                c.push(x);
                c
            })
            .collect();
        let a = SummaryStats::from_clusters(&clusters);
        let b = SummaryStats::from_samples(&xs);
        assert_relative_eq!(a.mean, b.mean);
        assert_relative_eq!(a.std_error, b.std_error, max_relative = 1e-12);
    }

    #[test]
    fn chi2_gof_accepts_exact_counts_and_rejects_shifted() {
        let pmf = |k: usize| 0.5f64.powi(k as i32 + 1);
        let exact: Vec<u64> = (0..12).map(|k| (pmf(k) * 4096.0).round() as u64).collect();
        let t = chi2_gof(&exact, pmf);
        assert!(t.statistic < 1.0 && t.passes(0.01), "{t:?}");
        let mut shifted = vec![0u64];
        shifted.extend(&exact);
        assert!(!chi2_gof(&shifted, pmf).passes(0.01));
    }

    #[test]
    fn chi2_homogeneity_identical_histograms() {
        let a = [100u64, 50, 25, 12, 6, 3];
        let t = chi2_homogeneity(&a, &a);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        let b = [10u64, 20, 40, 80, 100, 60];
        assert!(!chi2_homogeneity(&a, &b).passes(0.01));
    }

    #[test]
    fn clustered_chi2_on_singletons_has_unit_design_effect() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pmf = |k: usize| 0.5f64.powi(k as i32 + 1);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut k = 0;
            while rng.random::<f64>() < 0.5 {
                k += 1;
            }
            k
        };
        let singletons: Vec<Vec<u64>> = (0..4000)
            .map(|_| {
                let mut h = vec![0u64; 20];
                h[draw(&mut rng)] += 1;
                h
            })
            .collect();
        let t = chi2_gof_clustered(&singletons, pmf);
        assert!((t.design_effect - 1.0).abs() < 0.1, "{t:?}");
        // every cluster holds four copies of one draw
        let copies: Vec<Vec<u64>> = singletons.iter().map(|h| h.iter().map(|c| 4 * c).collect()).collect();
        let t4 = chi2_gof_clustered(&copies, pmf);
        assert!((t4.design_effect - 4.0).abs() < 0.4, "{t4:?}");
        assert_relative_eq!(
            t4.adjusted.statistic,
            t4.raw.statistic / (t4.design_effect * (1.0 + t4.dispersion))
        );
        assert!(t4.dispersion < 0.2, "{t4:?}");
        let h = chi2_homogeneity_clustered(&copies[..2000], &copies[2000..]);
        assert!((h.design_effect - 4.0).abs() < 0.6, "{h:?}");
        assert!(h.passes(0.001));
    }

    #[test]
    fn merge_bins_reaches_minimum() {
        let r = merge_bins(&[10.0, 6.0, 3.0, 1.0, 0.5], 5.0);
        assert_eq!(r, vec![0..1, 1..5]);
        let r = merge_bins(&[1.0, 1.0], 5.0);
        assert_eq!(r, vec![0..2]);
    }

    #[test]
    fn ks_statistics() {
        let mut a = vec![0.1, 0.2, 0.3, 0.4];
        let mut b = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut c = vec![1.1, 1.2];
        assert_eq!(ks_two_sample(&mut a, &mut c), 1.0);
        let mut u: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_one_sample(&mut u, |x| x.clamp(0.0, 1.0)) <= 0.0005 + 1e-12);
        assert_relative_eq!(ks_critical(0.01, 100, 100), 1.6276 * (0.02f64).sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn isotonic_pools_violators() {
        let fit = isotonic(&[0.0, 0.3, 0.2, 0.6, 0.5, 0.9], &[1.0; 6]);
        assert_eq!(fit.len(), 6);
        assert!(fit.windows(2).all(|w| w[0] <= w[1]));
        assert_relative_eq!(fit[1], 0.25);
        assert_relative_eq!(fit[2], 0.25);
        assert_relative_eq!(fit[4], 0.55);
    }

    #[test]
    fn crossing_interpolates() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [0.1, 0.3, 0.7];
        assert_relative_eq!(crossing(&xs, &ys, 0.5).unwrap(), 2.5);
        assert_eq!(crossing(&xs, &ys, 0.9), None);
        assert_eq!(crossing(&xs, &ys, 0.05), Some(1.0));
    }
}
