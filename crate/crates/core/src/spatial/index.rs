use std::collections::BinaryHeap;

use super::{Point2, PointSet, Window};
use crate::{Error, Result};

/// Uniform bucket grid over a window.
///
/// Cell contents are stored in CSR form: `starts[c]..starts[c + 1]` indexes
/// into `slots`, which holds point ordinals. Every point appears in exactly
/// one cell; points on or slightly outside the window edge are clamped into
/// the border cells.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a [Point2],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: i64,
    ny: i64,
    starts: Vec<u32>,
    slots: Vec<u32>,
}

impl<'a> SpatialIndex<'a> {
    pub fn new(points: &'a [Point2], window: &Window, cell_size: f64) -> Self {
        let side = window.side();
        let cell = if cell_size.is_finite() && cell_size > 0.0 {
            cell_size.min(side)
        } else {
            side
        };
        let n_side = ((side / cell).ceil() as i64).clamp(1, 4096);
        let cell = side / n_side as f64;
        let x0 = -window.half_side();
        let y0 = -window.half_side();
        let mut idx = SpatialIndex {
            points,
            x0,
            y0,
            cell,
            nx: n_side,
            ny: n_side,
            starts: Vec::new(),
            slots: Vec::new(),
        };
        let n_cells = (n_side * n_side) as usize;
        let mut counts = vec![0u32; n_cells + 1];
        let cells: Vec<usize> = points.iter().map(|p| idx.cell_of(*p)).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for c in 0..n_cells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut slots = vec![0u32; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            slots[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        idx.starts = counts;
        idx.slots = slots;
        idx
    }

    /// Index with the default cell size `1 / sqrt(density)`.
    pub fn for_point_set(set: &'a PointSet) -> Self {
        let cell = if set.density > 0.0 {
            1.0 / set.density.sqrt()
        } else {
            let n = set.points.len().max(1) as f64;
            set.window.side() / n.sqrt()
        };
        Self::new(&set.points, &set.window, cell)
    }

    pub fn points(&self) -> &'a [Point2] {
        self.points
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    #[inline]
    fn raw_cell(&self, p: Point2) -> (i64, i64) {
        (
            ((p.x - self.x0) / self.cell).floor() as i64,
            ((p.y - self.y0) / self.cell).floor() as i64,
        )
    }

    #[inline]
    fn cell_of(&self, p: Point2) -> usize {
        let (cx, cy) = self.raw_cell(p);
        let cx = cx.clamp(0, self.nx - 1);
        let cy = cy.clamp(0, self.ny - 1);
        (cy * self.nx + cx) as usize
    }

    #[inline]
    fn bucket(&self, cx: i64, cy: i64) -> &[u32] {
        let c = (cy * self.nx + cx) as usize;
        &self.slots[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    fn max_ring(&self, cx: i64, cy: i64) -> i64 {
        cx.abs()
            .max((self.nx - 1 - cx).abs())
            .max(cy.abs())
            .max((self.ny - 1 - cy).abs())
    }

    /// Visit every grid cell at Chebyshev distance exactly `k` from
    /// `(cx, cy)` that lies inside the grid.
    fn for_ring(&self, cx: i64, cy: i64, k: i64, mut f: impl FnMut(&[u32])) {
        let ylo = (cy - k).max(0);
        let yhi = (cy + k).min(self.ny - 1);
        for y in ylo..=yhi {
            if k == 0 || y == cy - k || y == cy + k {
                let xlo = (cx - k).max(0);
                let xhi = (cx + k).min(self.nx - 1);
                for x in xlo..=xhi {
                    f(self.bucket(x, y));
                }
            } else {
                if cx - k >= 0 && cx - k < self.nx {
                    f(self.bucket(cx - k, y));
                }
                if cx + k >= 0 && cx + k < self.nx {
                    f(self.bucket(cx + k, y));
                }
            }
        }
    }

    /// Lower bound on the distance from a query in cell `(cx, cy)` to any
    /// point in ring `k`.
    #[inline]
    fn ring_gap(&self, k: i64) -> f64 {
        ((k - 1).max(0)) as f64 * self.cell
    }

    /// Nearest point to `query`; ties go to the smallest ordinal.
    pub fn nearest(&self, query: Point2) -> Option<(usize, f64)> {
        self.nearest_where(query, |_| true)
    }

    /// Nearest point among those accepted by `keep`.
    pub fn nearest_where(
        &self,
        query: Point2,
        keep: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = self.raw_cell(query);
        let mut best: Option<(f64, u32)> = None;
        for k in 0..=self.max_ring(cx, cy) {
            if let Some((d2, _)) = best {
                let gap = self.ring_gap(k);
                if gap * gap > d2 {
                    break;
                }
            }
            self.for_ring(cx, cy, k, |bucket| {
                for &i in bucket {
                    if !keep(i as usize) {
                        continue;
                    }
                    let d2 = self.points[i as usize].dist2(query);
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => d2 < bd || (d2 == bd && i < bi),
                    };
                    if better {
                        best = Some((d2, i));
                    }
                }
            });
        }
        best.map(|(d2, i)| (i as usize, d2.sqrt()))
    }

    /// The `k`-th nearest point (1-based); ties ordered by ordinal.
    pub fn kth_nearest(&self, query: Point2, k: usize) -> Result<(usize, f64)> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.points.len() < k {
            return Err(Error::InsufficientPoints {
                needed: k,
                available: self.points.len(),
            });
        }
        struct Key(f64, u32);
        impl PartialEq for Key {
            fn eq(&self, other: &Self) -> bool {
                self.cmp(other).is_eq()
            }
        }
        impl Eq for Key {}
        impl PartialOrd for Key {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Key {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.0
                    .total_cmp(&other.0)
                    .then_with(|| self.1.cmp(&other.1))
            }
        }
        // max-heap of the k best so far
        let mut heap: BinaryHeap<Key> = BinaryHeap::with_capacity(k + 1);
        let (cx, cy) = self.raw_cell(query);
        for ring in 0..=self.max_ring(cx, cy) {
            if heap.len() == k {
                let gap = self.ring_gap(ring);
                if gap * gap > heap.peek().expect("non-empty").0 {
                    break;
                }
            }
            self.for_ring(cx, cy, ring, |bucket| {
                for &i in bucket {
                    let key = Key(self.points[i as usize].dist2(query), i);
                    if heap.len() < k {
                        heap.push(key);
                    } else if key < *heap.peek().expect("non-empty") {
                        heap.pop();
                        heap.push(key);
                    }
                }
            });
        }
        let Key(d2, i) = heap.pop().expect("k points present");
        Ok((i as usize, d2.sqrt()))
    }

    /// Call `f(ordinal, squared distance)` for every point with
    /// `dist < radius` (or `<=` when `inclusive`).
    pub fn for_each_within(
        &self,
        query: Point2,
        radius: f64,
        inclusive: bool,
        f: impl FnMut(usize, f64),
    ) {
        if !(radius >= 0.0) {
            return;
        }
        self.for_each_within_sq(query, radius * radius, inclusive, f)
    }

    /// As [`Self::for_each_within`], with the radius given squared so that
    /// callers comparing squared distances get exactly the same predicate.
    pub fn for_each_within_sq(
        &self,
        query: Point2,
        r2: f64,
        inclusive: bool,
        mut f: impl FnMut(usize, f64),
    ) {
        if self.points.is_empty() || !(r2 >= 0.0) {
            return;
        }
        if r2.is_infinite() {
            for (i, p) in self.points.iter().enumerate() {
                f(i, p.dist2(query));
            }
            return;
        }
        let reach = r2.sqrt() * (1.0 + 1e-12) + 1e-300;
        let lo = self.raw_cell(Point2::new(query.x - reach, query.y - reach));
        let hi = self.raw_cell(Point2::new(query.x + reach, query.y + reach));
        let (xlo, xhi) = (lo.0.max(0), hi.0.min(self.nx - 1));
        let (ylo, yhi) = (lo.1.max(0), hi.1.min(self.ny - 1));
        for y in ylo..=yhi {
            for x in xlo..=xhi {
                for &i in self.bucket(x, y) {
                    let d2 = self.points[i as usize].dist2(query);
                    if d2 < r2 || (inclusive && d2 == r2) {
                        f(i as usize, d2);
                    }
                }
            }
        }
    }

    /// Squared distance to the nearest point of each class, where
    /// `class_of` maps an ordinal to `0..classes`. `None` entries are
    /// classes with no points.
    pub fn nearest_sq_by_class(
        &self,
        query: Point2,
        classes: usize,
        class_of: impl Fn(usize) -> usize,
    ) -> Vec<Option<f64>> {
        let mut best: Vec<Option<f64>> = vec![None; classes];
        if self.points.is_empty() {
            return best;
        }
        let (cx, cy) = self.raw_cell(query);
        for k in 0..=self.max_ring(cx, cy) {
            let gap = self.ring_gap(k);
            let settled = best.iter().all(|b| b.is_some_and(|d2| gap * gap > d2));
            if settled {
                break;
            }
            self.for_ring(cx, cy, k, |bucket| {
                for &i in bucket {
                    let c = class_of(i as usize);
                    let d2 = self.points[i as usize].dist2(query);
                    if best[c].is_none_or(|b| d2 < b) {
                        best[c] = Some(d2);
                    }
                }
            });
        }
        best
    }

    /// Ordinals of points strictly closer than `radius`, ascending.
    pub fn within(&self, query: Point2, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(query, radius, false, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Any point (other than `exclude`) at squared distance `< r2`, or
    /// `<= r2` when `inclusive`. Searches outward from the query and stops
    /// at the first hit.
    pub fn find_within(
        &self,
        query: Point2,
        r2: f64,
        inclusive: bool,
        exclude: Option<usize>,
    ) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = self.raw_cell(query);
        let radius = r2.sqrt();
        let mut found = None;
        for k in 0..=self.max_ring(cx, cy) {
            let gap = self.ring_gap(k);
            if gap > radius {
                break;
            }
            self.for_ring(cx, cy, k, |bucket| {
                if found.is_some() {
                    return;
                }
                for &i in bucket {
                    if Some(i as usize) == exclude {
                        continue;
                    }
                    let d2 = self.points[i as usize].dist2(query);
                    if d2 < r2 || (inclusive && d2 == r2) {
                        found = Some(i as usize);
                        return;
                    }
                }
            });
            if found.is_some() {
                break;
            }
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{sample_poisson, PointKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(q: Point2, pts: &[Point2]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in pts.iter().enumerate() {
            let d = p.dist(q);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    fn brute_kth(q: Point2, pts: &[Point2], k: usize) -> (usize, f64) {
        let mut v: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| (p.dist2(q), i)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        (v[k - 1].1, v[k - 1].0.sqrt())
    }

    #[test]
    fn trivial_examples() {
        let w = Window::new(5.0, 0.0).unwrap();
        let pts = vec![Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        let idx = SpatialIndex::new(&pts, &w, 1.0);
        assert_eq!(idx.nearest(Point2::ORIGIN), Some((0, 1.0)));

        let empty: Vec<Point2> = vec![];
        let idx = SpatialIndex::new(&empty, &w, 1.0);
        assert_eq!(idx.nearest(Point2::ORIGIN), None);

        let pts = vec![Point2::new(1.0, 0.0), Point2::new(3.0, 0.0), Point2::new(2.0, 0.0)];
        let idx = SpatialIndex::new(&pts, &w, 1.0);
        assert_eq!(idx.kth_nearest(Point2::ORIGIN, 2).unwrap(), (2, 2.0));
        assert!(matches!(
            idx.kth_nearest(Point2::ORIGIN, 4),
            Err(Error::InsufficientPoints { needed: 4, available: 3 })
        ));
    }

    #[test]
    fn ties_go_to_smallest_ordinal() {
        let w = Window::new(5.0, 0.0).unwrap();
        let pts = vec![Point2::new(0.0, 1.0), Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0)];
        let idx = SpatialIndex::new(&pts, &w, 0.7);
        assert_eq!(idx.nearest(Point2::ORIGIN).unwrap().0, 0);
        assert_eq!(idx.kth_nearest(Point2::ORIGIN, 2).unwrap().0, 1);
        assert_eq!(idx.kth_nearest(Point2::ORIGIN, 3).unwrap().0, 2);
    }

    #[test]
    fn grid_queries_match_brute_force() {
        let w = Window::new(15.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let set = sample_poisson(1000.0 / w.area(), w, PointKind::Legitimate, &mut rng).unwrap();
        let idx = set.index();
        for _ in 0..1000 {
            // queries also fall outside the window
            let q = Point2::new(rng.random_range(-18.0..18.0), rng.random_range(-18.0..18.0));
            assert_eq!(idx.nearest(q), brute_nearest(q, &set.points));
            let k = rng.random_range(1..=12);
            assert_eq!(idx.kth_nearest(q, k).unwrap(), brute_kth(q, &set.points, k));
            assert_eq!(idx.kth_nearest(q, 1).unwrap(), idx.nearest(q).unwrap());
            let r = rng.random_range(0.0..3.0);
            let brute: Vec<usize> = (0..set.len()).filter(|&i| set.points[i].dist(q) < r).collect();
            assert_eq!(idx.within(q, r), brute);
            let hit = idx.find_within(q, r * r, false, None);
            assert_eq!(hit.is_some(), !brute.is_empty());
        }
    }

    #[test]
    fn every_point_indexed_once() {
        let w = Window::new(7.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = sample_poisson(3.0, w, PointKind::Legitimate, &mut rng).unwrap();
        let idx = SpatialIndex::new(&set.points, &w, 0.37);
        let mut seen: Vec<u32> = idx.slots.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..set.len() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn nearest_neighbour_squared_distance_has_mean_one_over_pi() {
        // unit density: R^2 ~ Exp(pi), E[R^2] = 1/pi, Var = 1/pi^2
        let w = Window::new(6.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let set = sample_poisson(1.0, w, PointKind::Legitimate, &mut rng).unwrap();
            let (_, d) = set.index().nearest(Point2::ORIGIN).unwrap();
            sum += d * d;
        }
        let mean = sum / n as f64;
        let se = (1.0 / std::f64::consts::PI) / (n as f64).sqrt();
        assert!((mean - 1.0 / std::f64::consts::PI).abs() < 3.0 * se, "mean {mean}");
    }
}
