//! Area of the typical Poisson-Voronoi cell, by hit-or-miss.
//!
//! A point is placed at the origin and a unit-density Poisson process is
//! added around it. Uniform test points are thrown over the window; the
//! fraction whose nearest point is the origin, times the window area,
//! estimates the origin's cell area.
//!
//! The hit count `H` is binomial given the true area `A`, so powers and
//! exponentials of the raw estimate are biased. [`CellAreaSample`] keeps `H`
//! and exposes the unbiased factorial-moment and binomial-PGF forms.

use rand::Rng;

use super::{sample_poisson, Point2, PointKind, SpatialIndex, Window};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellAreaSample {
    pub hits: u32,
    pub n_test: u32,
    pub window_area: f64,
}

impl CellAreaSample {
    /// Plain hit-or-miss estimate of the cell area.
    pub fn area(&self) -> f64 {
        self.window_area * self.hits as f64 / self.n_test as f64
    }

    /// Unbiased estimate of `A^k` given the cell:
    /// `W^k H(H-1)..(H-k+1) / (n(n-1)..(n-k+1))`.
    pub fn power(&self, k: u32) -> f64 {
        let mut v = 1.0;
        for j in 0..k {
            let num = self.hits as f64 - j as f64;
            if num <= 0.0 {
                return 0.0;
            }
            v *= self.window_area * num / (self.n_test as f64 - j as f64);
        }
        v
    }

    /// Estimate of `exp(-rate * A)` via the binomial generating function:
    /// `E[(1 - rate W / n)^H] = (1 - rate A / n)^n`, which differs from
    /// `exp(-rate A)` by `O(rate^2 A^2 / n)`. Falls back to the plug-in value
    /// when `rate W >= n`.
    pub fn exp_neg(&self, rate: f64) -> f64 {
        let step = rate * self.window_area / self.n_test as f64;
        if step < 1.0 {
            (1.0 - step).powi(self.hits as i32)
        } else {
            (-rate * self.area()).exp()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VoronoiSampler {
    pub n_test: u32,
    pub window: Window,
}

impl Default for VoronoiSampler {
    fn default() -> Self {
        Self {
            n_test: 10_000,
            window: Window::new(6.0, 0.0).expect("valid"),
        }
    }
}

impl VoronoiSampler {
    pub fn new(n_test: u32, window: Window) -> Self {
        Self { n_test, window }
    }

    /// Origin plus a unit-density Poisson sample; the origin is point 0.
    pub fn palm_points<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Point2>> {
        let set = sample_poisson(1.0, self.window, PointKind::Eavesdropper, rng)?;
        let mut pts = Vec::with_capacity(set.len() + 1);
        pts.push(Point2::ORIGIN);
        pts.extend(set.points);
        Ok(pts)
    }

    pub fn hit_or_miss<R: Rng + ?Sized>(&self, points: &[Point2], rng: &mut R) -> CellAreaSample {
        let index = SpatialIndex::new(points, &self.window, 1.0);
        let mut hits = 0u32;
        for _ in 0..self.n_test {
            let y = self.window.sample_uniform(rng);
            let r2 = y.dist2(Point2::ORIGIN);
            if index.find_within(y, r2, false, Some(0)).is_none() {
                hits += 1;
            }
        }
        CellAreaSample {
            hits,
            n_test: self.n_test,
            window_area: self.window.area(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CellAreaSample> {
        let pts = self.palm_points(rng)?;
        Ok(self.hit_or_miss(&pts, rng))
    }

    /// `count` independent samples, sample `j` drawn from stream `(seed, j)`.
    pub fn sample_many(&self, seed: u64, count: usize) -> Result<Vec<CellAreaSample>> {
        use rayon::prelude::*;
        (0..count as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = crate::seed::rng(seed, &[crate::seed::stream::VORONOI, j]);
                self.sample(&mut rng)
            })
            .collect()
    }
}

/// One hit-or-miss sample of the typical cell area (unit-density scale).
pub fn sample_typical_voronoi_area(seed: u64, n_test_points: u32, window: Window) -> Result<f64> {
    let sampler = VoronoiSampler::new(n_test_points, window);
    let mut rng = crate::seed::rng(seed, &[crate::seed::stream::VORONOI]);
    Ok(sampler.sample(&mut rng)?.area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exact area of the origin's cell by clipping the window square with
    /// the bisector half-planes of the other points.
    fn exact_cell_area(points: &[Point2], half_side: f64) -> f64 {
        let h = half_side;
        let mut poly = vec![
            Point2::new(-h, -h),
            Point2::new(h, -h),
            Point2::new(h, h),
            Point2::new(-h, h),
        ];
        let mut others: Vec<Point2> = points[1..].to_vec();
        others.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        for p in others {
            let reach = poly.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if p.norm() / 2.0 > reach {
                break;
            }
            // keep { y : y.p <= |p|^2 / 2 }
            let c = p.dist2(Point2::ORIGIN) / 2.0;
            let side = |v: Point2| v.x * p.x + v.y * p.y - c;
            let mut out = Vec::with_capacity(poly.len() + 1);
            for i in 0..poly.len() {
                let a = poly[i];
                let b = poly[(i + 1) % poly.len()];
                let (sa, sb) = (side(a), side(b));
                if sa <= 0.0 {
                    out.push(a);
                }
                if (sa <= 0.0) != (sb <= 0.0) {
                    let t = sa / (sa - sb);
                    out.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
                }
            }
            poly = out;
        }
        let n = poly.len();
        (0..n)
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            .abs()
            / 2.0
    }

    fn mean_se(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn exact_clipper_on_square_lattice() {
        // unit lattice neighbours: the origin's cell is the unit square
        let pts = vec![
            Point2::ORIGIN,
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, -1.0),
        ];
        assert!((exact_cell_area(&pts, 5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hit_or_miss_agrees_with_exact_cell_per_sample() {
        let sampler = VoronoiSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let pts = sampler.palm_points(&mut rng).unwrap();
            let exact = exact_cell_area(&pts, 6.0);
            let s = sampler.hit_or_miss(&pts, &mut rng);
            let p = exact / s.window_area;
            let sd = s.window_area * (p * (1.0 - p) / s.n_test as f64).sqrt();
            assert!((s.area() - exact).abs() < 4.0 * sd + 1e-9, "{} vs {exact}", s.area());
            assert!(s.area() >= 0.0);
        }
    }

    #[test]
    fn mean_area_is_one() {
        let samples = VoronoiSampler::default().sample_many(99, 10_000).unwrap();
        let areas: Vec<f64> = samples.iter().map(|s| s.area()).collect();
        assert!(areas.iter().all(|a| *a >= 0.0));
        let (m, se) = mean_se(&areas);
        assert!((m - 1.0).abs() < 3.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn second_moment_matches_exact_cell_oracle() {
        // oracle: exact polygon areas of independent Palm samples
        let sampler = VoronoiSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let exact_sq: Vec<f64> = (0..40_000)
            .map(|_| exact_cell_area(&sampler.palm_points(&mut rng).unwrap(), 6.0).powi(2))
            .collect();
        let (oracle, oracle_se) = mean_se(&exact_sq);
        // published value for the planar typical cell is about 1.280
        assert!((oracle - 1.280).abs() < 3.0 * oracle_se + 0.005, "oracle {oracle}");

        let samples = sampler.sample_many(5, 10_000).unwrap();
        let est: Vec<f64> = samples.iter().map(|s| s.power(2)).collect();
        let (m, se) = mean_se(&est);
        let tol = 3.0 * (se * se + oracle_se * oracle_se).sqrt();
        assert!((m - oracle).abs() < tol, "hit-or-miss {m} vs exact {oracle} (tol {tol})");
    }

    #[test]
    fn exp_neg_unbiased_against_exact() {
        let s = CellAreaSample {
            hits: 0,
            n_test: 100,
            window_area: 10.0,
        };
        assert_eq!(s.exp_neg(3.0), 1.0);
        assert_eq!(s.power(2), 0.0);
        let s = CellAreaSample {
            hits: 10,
            n_test: 100,
            window_area: 10.0,
        };
        assert!((s.area() - 1.0).abs() < 1e-12);
        assert!((s.power(2) - 100.0 * 10.0 * 9.0 / (100.0 * 99.0)).abs() < 1e-12);
        // expectation of the PGF form over the binomial law, computed exactly
        let (n, p, rate, w) = (200u32, 0.03f64, 2.0f64, 40.0f64);
        let mut expect = 0.0;
        let mut pmf = (1.0 - p).powi(n as i32);
        for h in 0..=n {
            let s = CellAreaSample { hits: h, n_test: n, window_area: w };
            expect += pmf * s.exp_neg(rate);
            pmf *= (n - h) as f64 / (h + 1) as f64 * p / (1.0 - p);
        }
        let target = (1.0 - rate * p * w / n as f64).powi(n as i32);
        assert!((expect - target).abs() < 1e-12);
        assert!((expect - (-rate * p * w).exp()).abs() < 0.02);
    }
}
