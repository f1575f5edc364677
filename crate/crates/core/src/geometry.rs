//! Point-cloud and raster utilities shared by the curve and chaos modules.

use alloc::vec;
use alloc::vec::Vec;

use crate::map::Point;
use crate::TAU;

fn sorted_by_x(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    idx
}

/// Distance from each point to its nearest other point. A lone point gets
/// `f64::INFINITY`.
pub fn nearest_neighbor_distances(points: &[Point]) -> Vec<f64> {
    let order = sorted_by_x(points);
    let mut best = vec![f64::INFINITY; points.len()];
    for (k, &i) in order.iter().enumerate() {
        let p = points[i];
        for &j in &order[k + 1..] {
            let dx = points[j].x - p.x;
            if dx >= best[i] {
                break;
            }
            let d = p.dist(points[j]);
            if d < best[i] {
                best[i] = d;
            }
            if d < best[j] {
                best[j] = d;
            }
        }
        // earlier neighbours were handled when they were the sweep origin,
        // except that their search may have stopped before reaching i
        for &j in order[..k].iter().rev() {
            let dx = p.x - points[j].x;
            if dx >= best[i] {
                break;
            }
            let d = p.dist(points[j]);
            if d < best[i] {
                best[i] = d;
            }
        }
    }
    best
}

/// Median of the finite entries, `None` if there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Lower empirical quantile, `q ∈ [0, 1]`, of the finite values.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = libm::floor(q.clamp(0.0, 1.0) * (v.len() - 1) as f64) as usize;
    Some(v[k])
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Single-linkage clusters: two points share a cluster when a chain of
/// points with consecutive distances `<= eps` joins them. Returns the point
/// indices of each cluster, clusters ordered by their smallest index.
pub fn single_linkage(points: &[Point], eps: f64) -> Vec<Vec<usize>> {
    let order = sorted_by_x(points);
    let mut ds = DisjointSet::new(points.len());
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > eps {
                break;
            }
            if points[i].dist(points[j]) <= eps {
                ds.union(i, j);
            }
        }
    }
    let mut label = vec![usize::MAX; points.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..points.len() {
        let root = ds.find(i);
        if label[root] == usize::MAX {
            label[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[label[root]].push(i);
    }
    clusters
}

pub fn centroid(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Shape statistics of a cluster viewed from its centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopShape {
    /// Largest angular gap between consecutive points sorted by angle.
    pub max_gap: f64,
    /// `2π / n`.
    pub mean_gap: f64,
    /// Mean absolute radius change between angular neighbours, relative to
    /// the mean radius. Small for a curve, order one for a filled blob.
    pub radial_roughness: f64,
}

impl LoopShape {
    pub fn of(points: &[Point]) -> Option<LoopShape> {
        if points.len() < 8 {
            return None;
        }
        let c = centroid(points);
        let mut polar: Vec<(f64, f64)> = points
            .iter()
            .map(|p| {
                let d = *p - c;
                (crate::wrap_angle(libm::atan2(d.y, d.x)), d.norm())
            })
            .collect();
        polar.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = polar.len();
        let mut gaps = Vec::with_capacity(n);
        let mut rough = 0.0;
        let mut mean_r = 0.0;
        for i in 0..n {
            let (a0, r0) = polar[i];
            let (a1, r1) = polar[(i + 1) % n];
            let g = if i + 1 == n { a1 + TAU - a0 } else { a1 - a0 };
            gaps.push(g);
            rough += (r1 - r0).abs();
            mean_r += r0;
        }
        mean_r /= n as f64;
        let max_gap = gaps.iter().copied().fold(0.0, f64::max);
        Some(LoopShape {
            max_gap,
            mean_gap: TAU / n as f64,
            radial_roughness: if mean_r > 0.0 {
                rough / n as f64 / mean_r
            } else {
                f64::INFINITY
            },
        })
    }

    /// Closed loop test: no angular gap beyond `gap_factor` times the mean
    /// gap, and angular neighbours lie on a curve rather than a blob.
    pub fn is_loop(&self, gap_factor: f64, max_roughness: f64) -> bool {
        self.max_gap < gap_factor * self.mean_gap
            && self.radial_roughness < max_roughness
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// `max_{p ∈ a} min_{q ∈ b} |p − q|`.
pub fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let mut bs: Vec<Point> = b.to_vec();
    bs.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut worst: f64 = 0.0;
    for p in a {
        let start = bs.partition_point(|q| q.x < p.x);
        let mut best = f64::INFINITY;
        for q in &bs[start..] {
            if q.x - p.x >= best {
                break;
            }
            best = best.min(p.dist(*q));
        }
        for q in bs[..start].iter().rev() {
            if p.x - q.x >= best {
                break;
            }
            best = best.min(p.dist(*q));
        }
        worst = worst.max(best);
    }
    worst
}

/// Winding number of the closed polygon `points` about `center`.
pub fn winding_number(points: &[Point], center: Point) -> i64 {
    let n = points.len();
    if n < 3 {
        return 0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - center;
        let b = points[(i + 1) % n] - center;
        total += libm::atan2(a.x * b.y - a.y * b.x, a.dot(b));
    }
    libm::round(total / TAU) as i64
}

/// A boolean raster over an axis-aligned rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    cells: Vec<bool>,
}

impl PixelGrid {
    pub fn new(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        PixelGrid {
            nx,
            ny,
            x_range,
            y_range,
            cells: vec![false; nx * ny],
        }
    }

    fn to_pixel_space(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * self.nx as f64,
            (p.y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * self.ny as f64,
        )
    }

    fn set_px(&mut self, u: f64, v: f64) {
        if u >= 0.0 && v >= 0.0 && u < self.nx as f64 && v < self.ny as f64 {
            let (i, j) = (u as usize, v as usize);
            self.cells[j * self.nx + i] = true;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.nx + i]
    }

    pub fn filled(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn paint_point(&mut self, p: Point) {
        let (u, v) = self.to_pixel_space(p);
        self.set_px(u, v);
    }

    /// Marks every pixel the segment passes through (sampled at no more than
    /// half-pixel spacing), after clipping it to the raster rectangle.
    pub fn paint_segment(&mut self, a: Point, b: Point) {
        let (u0, v0) = self.to_pixel_space(a);
        let (u1, v1) = self.to_pixel_space(b);
        let Some((t0, t1)) = clip(u0, v0, u1, v1, self.nx as f64, self.ny as f64) else {
            return;
        };
        let (du, dv) = (u1 - u0, v1 - v0);
        let len = (du * (t1 - t0)).abs().max((dv * (t1 - t0)).abs());
        let steps = libm::ceil(2.0 * len) as usize + 1;
        for s in 0..=steps {
            let t = t0 + (t1 - t0) * s as f64 / steps as f64;
            self.set_px(u0 + t * du, v0 + t * dv);
        }
    }

    /// Connected components of filled pixels under 8-connectivity, as pixel
    /// counts in scan order of each component's first pixel.
    pub fn components(&self) -> Vec<usize> {
        let mut seen = vec![false; self.cells.len()];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(k) = stack.pop() {
                size += 1;
                let (i, j) = ((k % self.nx) as isize, (k / self.nx) as isize);
                for dj in -1..=1isize {
                    for di in -1..=1isize {
                        let (ni, nj) = (i + di, j + dj);
                        if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
                            continue;
                        }
                        let nk = nj as usize * self.nx + ni as usize;
                        if self.cells[nk] && !seen[nk] {
                            seen[nk] = true;
                            stack.push(nk);
                        }
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }
}

/// Liang–Barsky clip of the segment `(u0,v0)–(u1,v1)` to `[0,w]×[0,h]`.
fn clip(u0: f64, v0: f64, u1: f64, v1: f64, w: f64, h: f64) -> Option<(f64, f64)> {
    let (du, dv) = (u1 - u0, v1 - v0);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [(-du, u0), (du, w - u0), (-dv, v0), (dv, h - v0)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, c: Point, r: f64) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point::new(c.x + r * libm::cos(t), c.y + r * libm::sin(t))
            })
            .collect()
    }

    #[test]
    fn nearest_neighbors_match_brute_force() {
        let mut pts = Vec::new();
        let mut s = 12345u64;
        for _ in 0..300 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (s >> 11) as f64 / (1u64 << 53) as f64;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = (s >> 11) as f64 / (1u64 << 53) as f64;
            pts.push(Point::new(x, y));
        }
        let fast = nearest_neighbor_distances(&pts);
        for i in 0..pts.len() {
            let brute = (0..pts.len())
                .filter(|&j| j != i)
                .map(|j| pts[i].dist(pts[j]))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(fast[i], brute);
        }
    }

    #[test]
    fn two_separate_rings_are_two_loops() {
        let mut pts = circle(400, Point::new(0.0, 0.0), 1.0);
        pts.extend(circle(400, Point::new(5.0, 0.0), 1.0));
        let nn = nearest_neighbor_distances(&pts);
        let eps = 3.0 * median(&nn).unwrap();
        let clusters = single_linkage(&pts, eps);
        assert_eq!(clusters.len(), 2);
        for c in clusters {
            let sub: Vec<Point> = c.iter().map(|&i| pts[i]).collect();
            assert!(LoopShape::of(&sub).unwrap().is_loop(10.0, 0.25));
        }
    }

    #[test]
    fn arc_and_blob_are_not_loops() {
        let arc: Vec<Point> = circle(400, Point::new(0.0, 0.0), 1.0)
            .into_iter()
            .take(250)
            .collect();
        assert!(!LoopShape::of(&arc).unwrap().is_loop(10.0, 0.25));

        let mut blob = Vec::new();
        let mut s = 99u64;
        for _ in 0..2000 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (s >> 11) as f64 / (1u64 << 53) as f64;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = (s >> 11) as f64 / (1u64 << 53) as f64;
            blob.push(Point::new(x, y));
        }
        assert!(!LoopShape::of(&blob).unwrap().is_loop(10.0, 0.25));
    }

    #[test]
    fn hausdorff_of_concentric_circles() {
        let a = circle(720, Point::new(0.0, 0.0), 1.0);
        let b = circle(720, Point::new(0.0, 0.0), 1.25);
        assert!((hausdorff(&a, &b) - 0.25).abs() < 1e-12);
        assert_eq!(hausdorff(&a, &a), 0.0);
        assert_eq!(hausdorff(&a, &[]), f64::INFINITY);
    }

    #[test]
    fn winding_numbers() {
        let c = circle(64, Point::new(0.0, 0.0), 1.0);
        assert_eq!(winding_number(&c, Point::new(0.0, 0.0)), 1);
        assert_eq!(winding_number(&c, Point::new(3.0, 0.0)), 0);
        let rev: Vec<Point> = c.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev, Point::new(0.1, 0.2)), -1);
    }

    #[test]
    fn raster_components() {
        let mut g = PixelGrid::new(100, 100, (0.0, 1.0), (0.0, 1.0));
        g.paint_segment(Point::new(0.05, 0.1), Point::new(0.3, 0.9));
        g.paint_segment(Point::new(0.6, 0.1), Point::new(0.95, 0.9));
        assert_eq!(g.components().len(), 2);
        // diagonal pixel steps stay one component under 8-connectivity
        g.paint_segment(Point::new(0.3, 0.9), Point::new(0.95, 0.9));
        assert_eq!(g.components().len(), 1);
        // segments entirely outside are ignored, crossing ones are clipped
        let mut h = PixelGrid::new(10, 10, (0.0, 1.0), (0.0, 1.0));
        h.paint_segment(Point::new(-1.0, -1.0), Point::new(-0.5, 2.0));
        assert_eq!(h.filled(), 0);
        h.paint_segment(Point::new(-1.0, 0.55), Point::new(2.0, 0.55));
        assert_eq!(h.filled(), 10);
        assert_eq!(h.components(), vec![10]);
    }
}
