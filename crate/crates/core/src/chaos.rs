//! Chaos diagnostics: Lyapunov exponents, sensitivity to initial
//! conditions, orbit-density histograms and the geometric horseshoe check at
//! `λ = 0.99, μ = 5`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::PixelGrid;
use crate::map::{iterate, jacobian, orbit, step, Params, Point, ESCAPE_BOUND};
use crate::{Error, Result, TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LyapunovResult {
    /// Per-iterate exponents, largest first.
    pub exponents: [f64; 2],
    pub n: usize,
    pub seed: Point,
    pub transient: usize,
}

/// Pushes an orthonormal frame through the tangent map and returns the
/// log-stretch of each direction. Re-orthonormalizes every step.
struct Frame {
    e1: Point,
    e2: Point,
}

impl Frame {
    fn new() -> Self {
        Frame {
            e1: Point::new(1.0, 0.0),
            e2: Point::new(0.0, 1.0),
        }
    }

    fn advance(&mut self, params: &Params, p: Point) -> (f64, f64) {
        let j = jacobian(params, p);
        let v1 = j.apply(self.e1);
        let v2 = j.apply(self.e2);
        let n1 = v1.norm();
        let u1 = v1 * (1.0 / n1);
        let w = v2 - u1 * v2.dot(u1);
        let n2 = w.norm();
        self.e1 = u1;
        // keep the frame right-handed so e2 stays well defined when w = 0
        self.e2 = if n2 > 0.0 {
            w * (1.0 / n2)
        } else {
            Point::new(-u1.y, u1.x)
        };
        (libm::log(n1), libm::log(n2))
    }
}

fn sorted(a: f64, b: f64) -> [f64; 2] {
    if a >= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Lyapunov exponents of the orbit of `seed`. The tangent frame is evolved
/// through the transient as well, but only the `n` steps after it are
/// averaged.
pub fn lyapunov(params: &Params, seed: Point, n: usize, transient: usize) -> Result<LyapunovResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("lyapunov needs at least one iterate"));
    }
    let mut frame = Frame::new();
    let mut p = seed;
    for k in 0..transient {
        frame.advance(params, p);
        p = step(params, p);
        if escaped(p) {
            return Err(Error::Escaped { step: k + 1 });
        }
    }
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for k in 0..n {
        let (l1, l2) = frame.advance(params, p);
        s1 += l1;
        s2 += l2;
        p = step(params, p);
        if escaped(p) {
            return Err(Error::Escaped {
                step: transient + k + 1,
            });
        }
    }
    Ok(LyapunovResult {
        exponents: sorted(s1 / n as f64, s2 / n as f64),
        n,
        seed,
        transient,
    })
}

/// Exponents from the Jacobians at a given sequence of points, which need
/// not be a true orbit (see [`saddle_orbit`]). Returns `None` for an empty
/// sequence.
pub fn lyapunov_along(params: &Params, points: &[Point]) -> Option<[f64; 2]> {
    if points.is_empty() {
        return None;
    }
    let mut frame = Frame::new();
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for &p in points {
        let (l1, l2) = frame.advance(params, p);
        s1 += l1;
        s2 += l2;
    }
    let n = points.len() as f64;
    Some(sorted(s1 / n, s2 / n))
}

fn escaped(p: Point) -> bool {
    !(p.x.abs() <= ESCAPE_BOUND && p.y.abs() <= ESCAPE_BOUND)
}

/// Settings for [`saddle_orbit`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StaggerConfig {
    /// A point is kept when its next `horizon` iterates stay in the box.
    pub horizon: usize,
    /// Jump sizes are `10^u` with `u` uniform on this range.
    pub log10_jump: (f64, f64),
    pub max_tries: usize,
    pub box_lo: Point,
    pub box_hi: Point,
    pub rng_seed: u64,
}

impl Default for StaggerConfig {
    fn default() -> Self {
        StaggerConfig {
            horizon: 10,
            log10_jump: (-13.0, -2.0),
            max_tries: 100_000,
            box_lo: Point::new(-0.5, -0.5),
            box_hi: Point::new(1.5, 1.5),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SaddleOrbit {
    pub points: Vec<Point>,
    /// Number of perturbations applied.
    pub jumps: usize,
    pub max_jump: f64,
}

/// Pseudo-orbit that lingers on a repelling chaotic set by stagger and step:
/// whenever the current point would leave the box within `horizon` steps it
/// is replaced by a random nearby point that does not.
pub fn saddle_orbit(params: &Params, start: Point, n: usize, config: &StaggerConfig) -> Result<SaddleOrbit> {
    let (lo, hi) = config.log10_jump;
    if !(lo <= hi) || config.horizon == 0 {
        return Err(Error::InvalidArgument("invalid stagger configuration"));
    }
    let survives = |mut q: Point| {
        for _ in 0..config.horizon {
            q = step(params, q);
            if !(q.x > config.box_lo.x && q.x < config.box_hi.x && q.y > config.box_lo.y && q.y < config.box_hi.y) {
                return false;
            }
        }
        true
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut p = start;
    let mut out = SaddleOrbit {
        points: Vec::with_capacity(n),
        jumps: 0,
        max_jump: 0.0,
    };
    for k in 0..n {
        if !survives(p) {
            let mut moved = false;
            for _ in 0..config.max_tries {
                let r = libm::pow(10.0, rng.gen_range(lo..=hi));
                let a = rng.gen::<f64>() * TAU;
                let q = p + Point::new(r * libm::cos(a), r * libm::sin(a));
                if survives(q) {
                    p = q;
                    out.jumps += 1;
                    out.max_jump = out.max_jump.max(r);
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Err(Error::Escaped { step: k });
            }
        }
        out.points.push(p);
        p = step(params, p);
    }
    Ok(out)
}

/// `(1/n) ln(|Φⁿ(p + δ) − Φⁿ(p)| / |δ|)` for an explicit displacement `δ`.
pub fn sensitivity_along(params: &Params, p: Point, delta: Point, n: usize) -> Result<f64> {
    let d0 = delta.norm();
    if !(d0 > 0.0 && d0 <= 1e-6) {
        return Err(Error::InvalidArgument("perturbation size must lie in (0, 1e-6]"));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sensitivity needs at least one iterate"));
    }
    let a = iterate(params, p, n)?;
    let b = iterate(params, p + delta, n)?;
    Ok(libm::log(a.dist(b) / d0) / n as f64)
}

/// [`sensitivity_along`] with `δ` of size `delta0` in a direction drawn from
/// a generator seeded with `rng_seed`.
pub fn sensitivity(params: &Params, p: Point, delta0: f64, n: usize, rng_seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let a = rng.gen::<f64>() * TAU;
    sensitivity_along(params, p, Point::new(delta0 * libm::cos(a), delta0 * libm::sin(a)), n)
}

/// Visit counts over `[0, 1]²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Splatter {
    pub bins: usize,
    /// Row-major, `counts[iy * bins + ix]`.
    pub counts: Vec<u64>,
    /// Bounded iterates, inside the square or not.
    pub total: u64,
    /// Bounded iterates that fell outside the square.
    pub outside: u64,
    /// Iterates lost because their orbit escaped first.
    pub escaped_iterates: u64,
}

impl Splatter {
    pub fn cell_center(&self, index: usize) -> Point {
        let h = 1.0 / self.bins as f64;
        Point::new(
            (index % self.bins) as f64 * h + 0.5 * h,
            (index / self.bins) as f64 * h + 0.5 * h,
        )
    }

    /// Cells whose count is at least the 90th percentile of nonzero counts.
    pub fn top_decile(&self) -> Vec<usize> {
        let mut nonzero: Vec<u64> = self.counts.iter().copied().filter(|&c| c > 0).collect();
        if nonzero.is_empty() {
            return Vec::new();
        }
        nonzero.sort_unstable();
        let cut = nonzero[(nonzero.len() * 9) / 10];
        (0..self.counts.len()).filter(|&i| self.counts[i] >= cut).collect()
    }

    /// Distance from `p` to the nearest top-decile cell center.
    pub fn top_decile_distance(&self, p: Point) -> f64 {
        self.top_decile()
            .into_iter()
            .map(|i| self.cell_center(i).dist(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Histogram of iterates `1..=n` of every seed on a `bins × bins` grid over
/// the unit square. The right and top edges fall in the last cell.
pub fn splatter_stats(params: &Params, seeds: &[Point], n: usize, bins: usize) -> Result<Splatter> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin"));
    }
    let mut h = Splatter {
        bins,
        counts: alloc::vec![0; bins * bins],
        total: 0,
        outside: 0,
        escaped_iterates: 0,
    };
    for &seed in seeds {
        let o = orbit(params, seed, n);
        let kept = o.points.len() - 1;
        h.escaped_iterates += (n - kept) as u64;
        for p in &o.points[1..] {
            h.total += 1;
            if (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y) {
                let ix = ((p.x * bins as f64) as usize).min(bins - 1);
                let iy = ((p.y * bins as f64) as usize).min(bins - 1);
                h.counts[iy * bins + ix] += 1;
            } else {
                h.outside += 1;
            }
        }
    }
    Ok(h)
}

/// Axis-aligned ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EllipseRegion {
    pub center: Point,
    /// Semi-axis along `x`.
    pub semi_x: f64,
    /// Semi-axis along `y`.
    pub semi_y: f64,
}

impl EllipseRegion {
    /// The region `D` around `(1, 0)` and `(1, 0.2)`, with the long axis
    /// vertical.
    pub const HORSESHOE: EllipseRegion = EllipseRegion {
        center: Point::new(0.95, 0.1),
        semi_x: 0.075,
        semi_y: 0.13,
    };

    pub fn new(center: Point, semi_x: f64, semi_y: f64) -> Result<Self> {
        if !(semi_x > 0.0 && semi_y > 0.0) {
            return Err(Error::InvalidArgument("semi-axes must be positive"));
        }
        Ok(EllipseRegion { center, semi_x, semi_y })
    }

    /// `((x − cx)/a)² + ((y − cy)/b)²`; at most 1 inside.
    pub fn level(&self, p: Point) -> f64 {
        let u = (p.x - self.center.x) / self.semi_x;
        let v = (p.y - self.center.y) / self.semi_y;
        u * u + v * v
    }

    pub fn contains(&self, p: Point) -> bool {
        self.level(p) <= 1.0
    }

    /// Point at normalized radius `r ∈ [0, 1]` and angle `theta`.
    pub fn point(&self, r: f64, theta: f64) -> Point {
        Point::new(
            self.center.x + self.semi_x * r * libm::cos(theta),
            self.center.y + self.semi_y * r * libm::sin(theta),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KeyPointCheck {
    pub input: Point,
    pub expected: Point,
    pub observed: Point,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ContainmentCheck {
    pub point: Point,
    pub level: f64,
    pub inside: bool,
}

pub const KEY_POINT_TOL: f64 = 1e-12;
pub const MIN_RESOLUTION: usize = 200;
/// Band around the diagonal edge used for the crossing test.
pub const DIAGONAL_BAND: f64 = 1e-2;
/// Rectangle around the horizontal edge intersected with `Φ²(D)`.
pub const HULL_X: (f64, f64) = (-0.05, 1.05);
pub const HULL_Y: (f64, f64) = (-0.1, 0.1);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HorseshoeWitness {
    pub ellipse: EllipseRegion,
    pub resolution: usize,
    pub grid: usize,
    pub key_points: Vec<KeyPointCheck>,
    pub containment: Vec<ContainmentCheck>,
    /// Some point of `Φ(D)` near `(0.8, 0.8)` lies within the diagonal band
    /// on each side of `y = x`.
    pub diagonal_crossing: bool,
    /// Pixel counts of the 8-connected components of `Φ²(D) ∩ hull`,
    /// largest first.
    pub components: Vec<usize>,
    /// Set when the resolution is below [`MIN_RESOLUTION`].
    pub inconclusive: bool,
    pub image1: Vec<Point>,
    pub image2: Vec<Point>,
}

impl HorseshoeWitness {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn key_points_pass(&self) -> bool {
        self.key_points.iter().all(|k| k.pass)
    }

    /// Key points, diagonal crossing and at least two components.
    pub fn holds(&self) -> bool {
        !self.inconclusive && self.key_points_pass() && self.diagonal_crossing && self.component_count() >= 2
    }
}

/// Forward-image check of the horseshoe at the given parameters.
///
/// `D` is sampled on a polar grid of `resolution` radii by `resolution`
/// angles. `Φ²(D)` is rasterized on a `grid × grid` raster of the hull by
/// drawing the images of segments between neighbouring samples.
pub fn horseshoe_witness(params: &Params, resolution: usize, grid: usize) -> Result<HorseshoeWitness> {
    if resolution < 2 || grid == 0 {
        return Err(Error::InvalidArgument("resolution and grid must be positive"));
    }
    let key_points = [
        (Point::new(1.0, 0.2), Point::new(0.8, 0.8)),
        (Point::new(0.8, 0.8), Point::new(0.2016, 0.0)),
    ]
    .iter()
    .map(|&(input, expected)| {
        let observed = step(params, input);
        KeyPointCheck {
            input,
            expected,
            observed,
            pass: observed.dist_max(expected) <= KEY_POINT_TOL,
        }
    })
    .collect();

    let ellipse = EllipseRegion::HORSESHOE;
    let containment = [Point::new(1.0, 0.0), Point::new(1.0, 0.2)]
        .iter()
        .map(|&point| ContainmentCheck {
            point,
            level: ellipse.level(point),
            inside: ellipse.contains(point),
        })
        .collect();

    let n = resolution;
    let mut image1 = Vec::with_capacity(n * n);
    let mut image2 = Vec::with_capacity(n * n);
    for j in 0..n {
        let r = j as f64 / (n - 1) as f64;
        for k in 0..n {
            let theta = TAU * k as f64 / n as f64;
            let a = step(params, ellipse.point(r, theta));
            image1.push(a);
            image2.push(step(params, a));
        }
    }

    let target = Point::new(0.8, 0.8);
    let (mut above, mut below) = (false, false);
    for p in &image1 {
        if p.dist(target) <= 0.1 {
            let d = (p.y - p.x) / core::f64::consts::SQRT_2;
            above |= d > 0.0 && d <= DIAGONAL_BAND;
            below |= d < 0.0 && d >= -DIAGONAL_BAND;
        }
    }

    let mut raster = PixelGrid::new(grid, grid, HULL_X, HULL_Y);
    for j in 0..n {
        for k in 0..n {
            let p = image2[j * n + k];
            raster.paint_point(p);
            if j + 1 < n {
                raster.paint_segment(p, image2[(j + 1) * n + k]);
            }
            raster.paint_segment(p, image2[j * n + (k + 1) % n]);
        }
    }
    let mut components = raster.components();
    components.sort_unstable_by(|a, b| b.cmp(a));

    Ok(HorseshoeWitness {
        ellipse,
        resolution,
        grid,
        key_points,
        containment,
        diagonal_crossing: above && below,
        components,
        inconclusive: resolution < MIN_RESOLUTION,
        image1,
        image2,
    })
}
