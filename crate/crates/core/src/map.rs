//! The map, its Jacobian, the form translated to a fixed point, the polar
//! form about that fixed point, the two-parameter paradigm map used for the
//! curve-doubling discussion, and preimages.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{poly, wrap_angle, Error, Result, TAU};

/// Iterates with either coordinate beyond this magnitude count as escaped.
pub const ESCAPE_BOUND: f64 = 1e12;

/// Tolerance on `|Φ(p) − p|` for a point to be accepted as fixed.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// The pair (λ, μ).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Params {
    lambda: f64,
    mu: f64,
}

impl Params {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite() {
            Ok(Params { lambda, mu })
        } else {
            Err(Error::InvalidParams { lambda, mu })
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True iff `0 < λ < 1 < μ`.
    pub fn standard_regime(&self) -> bool {
        self.lambda < 1.0 && self.mu > 1.0
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Params::new(self.lambda, mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(&self, other: Point) -> f64 {
        (*self - other).norm()
    }

    /// Max-norm distance.
    pub fn dist_max(&self, other: Point) -> f64 {
        let d = *self - other;
        d.x.abs().max(d.y.abs())
    }

    pub fn dot(&self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    fn escaped(&self) -> bool {
        !(self.x.abs() <= ESCAPE_BOUND && self.y.abs() <= ESCAPE_BOUND)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Polar coordinates `(r, θ)` about a center.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        debug_assert!(r >= 0.0, "negative radius {r}");
        PolarPoint { r, theta }
    }

    pub fn to_cartesian(&self) -> Point {
        Point::new(self.r * libm::cos(self.theta), self.r * libm::sin(self.theta))
    }

    /// Angle reduced to `[0, 2π)`.
    pub fn from_cartesian(p: Point) -> Self {
        PolarPoint {
            r: p.norm(),
            theta: wrap_angle(libm::atan2(p.y, p.x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Jacobian {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
}

impl Jacobian {
    pub fn trace(&self) -> f64 {
        self.j11 + self.j22
    }

    pub fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }

    pub fn apply(&self, v: Point) -> Point {
        Point::new(
            self.j11 * v.x + self.j12 * v.y,
            self.j21 * v.x + self.j22 * v.y,
        )
    }

    /// Eigenvalues from the characteristic polynomial. A triangular matrix
    /// returns its diagonal unchanged. Complex pairs are returned with the
    /// positive imaginary part first.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        if self.j21 == 0.0 || self.j12 == 0.0 {
            return [Complex64::new(self.j11, 0.0), Complex64::new(self.j22, 0.0)];
        }
        let half_tr = 0.5 * self.trace();
        let det = self.det();
        // discriminant written without the tr²/4 − det cancellation
        let half_gap = 0.5 * (self.j11 - self.j22);
        let disc = half_gap * half_gap + self.j12 * self.j21;
        if disc >= 0.0 {
            let s = libm::sqrt(disc);
            let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
            let small = if big != 0.0 { det / big } else { 0.0 };
            [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
        } else {
            let im = libm::sqrt(-disc);
            [Complex64::new(half_tr, im), Complex64::new(half_tr, -im)]
        }
    }
}

pub fn step(params: &Params, p: Point) -> Point {
    let (x, y) = (p.x, p.y);
    Point::new(
        1.0 - x * (params.lambda * (1.0 - x) + y),
        params.mu * y * (x - y),
    )
}

/// Apply [`step`] `n` times. Fails with [`Error::Escaped`] carrying the index
/// of the first iterate that left the escape box.
pub fn iterate(params: &Params, p: Point, n: usize) -> Result<Point> {
    let mut q = p;
    for k in 1..=n {
        q = step(params, q);
        if q.escaped() {
            return Err(Error::Escaped { step: k });
        }
    }
    Ok(q)
}

/// A finite trajectory. `escaped` holds the index of the first iterate that
/// left the escape box; that iterate is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<Point>,
    pub escaped: Option<usize>,
}

pub fn orbit(params: &Params, p: Point, n: usize) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    if p.escaped() {
        return Orbit {
            points,
            escaped: Some(0),
        };
    }
    points.push(p);
    let mut q = p;
    for k in 1..=n {
        q = step(params, q);
        if q.escaped() {
            return Orbit {
                points,
                escaped: Some(k),
            };
        }
        points.push(q);
    }
    Orbit {
        points,
        escaped: None,
    }
}

pub fn jacobian(params: &Params, p: Point) -> Jacobian {
    let (l, m) = (params.lambda, params.mu);
    Jacobian {
        j11: l * (2.0 * p.x - 1.0) - p.y,
        j12: -p.x,
        j21: m * p.y,
        j22: m * (p.x - 2.0 * p.y),
    }
}

/// `λ(2x − 1)(x − 2y) + 2y²`, which vanishes exactly where the map fails to
/// be a local diffeomorphism. The Jacobian determinant is μ times this.
pub fn singular_curve_value(params: &Params, p: Point) -> f64 {
    params.lambda * (2.0 * p.x - 1.0) * (p.x - 2.0 * p.y) + 2.0 * p.y * p.y
}

/// The map written in coordinates centered at a fixed point:
/// `q ↦ Φ(q + p*) − p*`.
///
/// The constant term cancels exactly, so the map is evaluated as its linear
/// part at `p*` plus the quadratic remainder `(λξ² − ξη, μη(ξ − η))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslatedMap {
    params: Params,
    center: Point,
    linear: Jacobian,
}

impl TranslatedMap {
    pub fn new(params: Params, center: Point) -> Result<Self> {
        let residual = step(&params, center).dist(center);
        if !(residual < FIXED_POINT_TOL) {
            return Err(Error::NotFixed { residual });
        }
        Ok(TranslatedMap {
            params,
            center,
            linear: jacobian(&params, center),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn linear_part(&self) -> Jacobian {
        self.linear
    }

    pub fn step(&self, q: Point) -> Point {
        let (xi, eta) = (q.x, q.y);
        let lin = self.linear.apply(q);
        Point::new(
            lin.x + self.params.lambda * xi * xi - xi * eta,
            lin.y + self.params.mu * eta * (xi - eta),
        )
    }

    /// The image of `(r cos θ, r sin θ)` divided by `r`, as a function of
    /// `r`, `cos θ` and `sin θ`. Well defined at `r = 0`.
    pub fn brackets(&self, r: f64, c: f64, s: f64) -> (f64, f64) {
        let j = &self.linear;
        let u = j.j11 * c + j.j12 * s + r * c * (self.params.lambda * c - s);
        let v = j.j21 * c + j.j22 * s + self.params.mu * r * s * (c - s);
        (u, v)
    }

    /// Radial stretch factor `U(r, θ) = R / r`.
    pub fn stretch(&self, r: f64, theta: f64) -> f64 {
        let (u, v) = self.brackets(r, libm::cos(theta), libm::sin(theta));
        libm::hypot(u, v)
    }

    /// `(R, Θ)` with `R = r U(r, θ)`. The returned angle is lifted so that
    /// `Θ − θ ∈ [0, 2π)`, the counterclockwise advance of the ray. At `r = 0`
    /// the angle is the limit along the ray, i.e. the direction of the
    /// linear part applied to `(cos θ, sin θ)`.
    pub fn polar_step(&self, pp: PolarPoint) -> PolarPoint {
        let (s, c) = libm::sincos(pp.theta);
        let (u, v) = self.brackets(pp.r, c, s);
        let advance = wrap_angle(libm::atan2(v, u) - pp.theta);
        PolarPoint {
            r: pp.r * libm::hypot(u, v),
            theta: pp.theta + advance,
        }
    }
}

/// The polar paradigm map with a logistic radial part:
/// `R = (ν + 1) r (1 − r)`, `Θ = θ + 2π (1 + k r sin θ) / (a + ν) mod 2π`.
pub fn paradigm_step(nu: f64, a: f64, k: f64, pp: PolarPoint) -> PolarPoint {
    let r = pp.r;
    PolarPoint {
        r: (nu + 1.0) * r * (1.0 - r),
        theta: wrap_angle(pp.theta + TAU / (a + nu) * (1.0 + k * r * libm::sin(pp.theta))),
    }
}

/// Accepted residual `|Φ(p) − target|` for a returned preimage.
pub const PREIMAGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Preimages {
    /// Distinct real preimages, sorted by `x`.
    pub points: Vec<Point>,
    /// The eliminating quartic had nearly coincident roots.
    pub ill_conditioned: bool,
}

/// All real solutions of `Φ(x, y) = target`.
///
/// With `c = 1 − u` and `A(x) = λx² − λx + c`, the first coordinate gives
/// `xy = A(x)`, and substituting into the second gives the quartic
/// `μ(x²A − A²) − v x² = 0`. Real roots are lifted back with `y = A(x)/x`
/// (or `y = ±√(−v/μ)` on `x = 0`) and polished by Newton's method on the
/// planar system.
pub fn preimages(params: &Params, target: Point) -> Preimages {
    let (l, m) = (params.lambda, params.mu);
    let (u, v) = (target.x, target.y);
    let c = 1.0 - u;
    let coeffs = [
        m * l * (1.0 - l),
        m * l * (2.0 * l - 1.0),
        m * (c - l * l - 2.0 * l * c) - v,
        2.0 * m * l * c,
        -m * c * c,
    ];
    let roots = poly::roots(&coeffs);

    let mut ill_conditioned = false;
    let mut near_multiple = [false; 4];
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < 1e-6 * scale {
                ill_conditioned = true;
                near_multiple[i] = true;
                near_multiple[j] = true;
            }
        }
    }

    let a_of = |x: f64| l * x * x - l * x + c;
    let mut points: Vec<Point> = Vec::new();
    for (i, z) in roots.iter().enumerate() {
        let real_enough = z.im.abs() < 1e-8 * z.norm().max(1.0);
        if !real_enough && !near_multiple[i] {
            continue;
        }
        let x = z.re;
        let mut starts: Vec<Point> = Vec::new();
        if x.abs() > 1e-8 {
            starts.push(Point::new(x, a_of(x) / x));
        }
        if x.abs() < 1e-4 {
            let y2 = -v / m;
            if y2 >= 0.0 {
                let y = libm::sqrt(y2);
                starts.push(Point::new(x, y));
                starts.push(Point::new(x, -y));
            }
        }
        for s in starts {
            if let Some(p) = newton_polish(params, target, s) {
                let scale = p.norm().max(1.0);
                if !points.iter().any(|q| q.dist(p) < 1e-7 * scale) {
                    points.push(p);
                }
            }
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Preimages {
        points,
        ill_conditioned,
    }
}

fn newton_polish(params: &Params, target: Point, start: Point) -> Option<Point> {
    let mut p = start;
    let mut best = p;
    let mut best_res = step(params, p).dist(target);
    for _ in 0..60 {
        let f = step(params, p) - target;
        let j = jacobian(params, p);
        let det = j.det();
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (j.j22 * f.x - j.j12 * f.y) / det;
        let dy = (-j.j21 * f.x + j.j11 * f.y) / det;
        p = Point::new(p.x - dx, p.y - dy);
        if !p.is_finite() {
            break;
        }
        let res = step(params, p).dist(target);
        if res < best_res {
            best_res = res;
            best = p;
        }
        if dx.abs().max(dy.abs()) <= 1e-16 * p.norm().max(1.0) {
            break;
        }
    }
    (best_res < PREIMAGE_TOL).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p099(mu: f64) -> Params {
        Params::new(0.99, mu).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.0, 1.0).is_err());
        assert!(Params::new(1.0, -2.0).is_err());
        assert!(Params::new(f64::NAN, 2.0).is_err());
        assert!(Params::new(f64::INFINITY, 2.0).is_err());
        assert!(Params::new(0.99, 4.5).unwrap().standard_regime());
        assert!(!Params::new(1.0, 4.5).unwrap().standard_regime());
        assert!(!Params::new(0.5, 1.0).unwrap().standard_regime());
        assert!(!Params::new(0.5, 0.9).unwrap().standard_regime());
    }

    #[test]
    fn logical_table_images() {
        for &(l, m) in &[(0.99, 4.5), (0.3, 7.0), (1.7, 0.2)] {
            let p = Params::new(l, m).unwrap();
            assert_eq!(step(&p, Point::new(0.0, 0.0)), Point::new(1.0, 0.0));
            assert_eq!(step(&p, Point::new(1.0, 0.0)), Point::new(1.0, 0.0));
            assert_eq!(step(&p, Point::new(1.0, 1.0)), Point::new(0.0, 0.0));
        }
    }

    #[test]
    fn key_points_at_mu_five() {
        let p = p099(5.0);
        let a = step(&p, Point::new(1.0, 0.2));
        assert!(a.dist_max(Point::new(0.8, 0.8)) < 1e-12);
        let b = step(&p, Point::new(0.8, 0.8));
        assert!(b.dist_max(Point::new(0.2016, 0.0)) < 1e-12);
    }

    #[test]
    fn iterate_and_orbit_contracts() {
        let p = p099(4.5);
        let q = Point::new(0.3, 0.1);
        assert_eq!(iterate(&p, q, 0).unwrap(), q);
        assert_eq!(iterate(&p, Point::new(1.0, 0.0), 1000).unwrap(), Point::new(1.0, 0.0));
        assert_eq!(iterate(&p, Point::new(1.0, 1.0), 2).unwrap(), Point::new(1.0, 0.0));

        let o = orbit(&p, Point::new(1.0, 0.0), 3);
        assert_eq!(o.points, alloc::vec![Point::new(1.0, 0.0); 4]);
        assert_eq!(o.escaped, None);
        let o = orbit(&p, Point::new(0.0, 0.0), 2);
        assert_eq!(
            o.points,
            alloc::vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 0.0)]
        );
    }

    #[test]
    fn escape_is_reported_not_panicking() {
        let p = p099(4.5);
        let o = orbit(&p, Point::new(2.0, 2.0), 100);
        let k = o.escaped.expect("should escape");
        assert_eq!(o.points.len(), k);
        assert!(o.points.iter().all(|q| q.is_finite()));
        assert_eq!(iterate(&p, Point::new(2.0, 2.0), 100), Err(Error::Escaped { step: k }));
        assert!(iterate(&p, Point::new(2.0, 2.0), k - 1).is_ok());
        let o = orbit(&p, Point::new(f64::NAN, 0.0), 5);
        assert_eq!(o.escaped, Some(0));
        assert!(o.points.is_empty());
    }

    #[test]
    fn jacobian_at_axis_fixed_points() {
        let p = p099(5.0);
        let j = jacobian(&p, Point::new(1.0, 0.0));
        assert_eq!((j.j11, j.j12, j.j21, j.j22), (0.99, -1.0, 0.0, 5.0));
        let j = jacobian(&p, Point::new(1.0 / 0.99, 0.0));
        assert!((j.j11 - (2.0 - 0.99)).abs() < 1e-15);
        assert!((j.j12 + 1.0 / 0.99).abs() < 1e-15);
        assert_eq!(j.j21, 0.0);
        assert!((j.j22 - 5.0 / 0.99).abs() < 1e-15);
        let ev = j.eigenvalues();
        assert!((ev[0].re - (2.0 - 0.99)).abs() < 1e-15);
        assert!((ev[1].re - 5.0 / 0.99).abs() < 1e-14);
    }

    #[test]
    fn singular_curve_values() {
        let p = p099(5.0);
        assert_eq!(singular_curve_value(&p, Point::new(0.5, 0.0)), 0.0);
        assert_eq!(singular_curve_value(&p, Point::new(0.0, 0.0)), 0.0);
        assert_eq!(singular_curve_value(&p, Point::new(1.0, 0.0)), 0.99);
    }

    #[test]
    fn eigenvalues_of_rotation_and_real_matrices() {
        let j = Jacobian {
            j11: 0.0,
            j12: -1.0,
            j21: 1.0,
            j22: 0.0,
        };
        let ev = j.eigenvalues();
        assert_eq!(ev[0], Complex64::new(0.0, 1.0));
        assert_eq!(ev[1], Complex64::new(0.0, -1.0));
        let j = Jacobian {
            j11: 2.0,
            j12: 1.0,
            j21: 1.0,
            j22: 2.0,
        };
        let ev = j.eigenvalues();
        assert!((ev[0].re - 3.0).abs() < 1e-15 && (ev[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn translated_map_requires_fixed_center() {
        let p = p099(4.5);
        assert!(matches!(
            TranslatedMap::new(p, Point::new(0.5, 0.3)),
            Err(Error::NotFixed { .. })
        ));
        let t = TranslatedMap::new(p, Point::new(1.0, 0.0)).unwrap();
        assert_eq!(t.step(Point::new(0.0, 0.0)), Point::new(0.0, 0.0));
    }

    #[test]
    fn polar_step_at_zero_radius() {
        let t = TranslatedMap::new(p099(4.5), Point::new(1.0, 0.0)).unwrap();
        for k in 0..16 {
            let theta = k as f64 * 0.4;
            let out = t.polar_step(PolarPoint::new(0.0, theta));
            assert_eq!(out.r, 0.0);
            let adv = out.theta - theta;
            assert!((0.0..TAU).contains(&adv));
        }
    }

    #[test]
    fn paradigm_endpoints() {
        for &theta in &[0.0, 1.0, 4.0] {
            assert_eq!(paradigm_step(0.3, 1.2, 0.5, PolarPoint::new(0.0, theta)).r, 0.0);
            assert_eq!(paradigm_step(0.3, 1.2, 0.5, PolarPoint::new(1.0, theta)).r, 0.0);
            let q = paradigm_step(0.0, 1.0, 0.0, PolarPoint::new(0.4, theta));
            assert!((q.r - 0.24).abs() < 1e-15);
            let d = (q.theta - theta).abs();
            assert!(d < 1e-14 || (TAU - d) < 1e-14);
        }
    }

    #[test]
    fn preimages_of_unit_fixed_point() {
        let p = p099(5.0);
        let pre = preimages(&p, Point::new(1.0, 0.0));
        assert!(pre.points.iter().any(|q| q.dist(Point::new(0.0, 0.0)) < 1e-9));
        assert!(pre.points.iter().any(|q| q.dist(Point::new(1.0, 0.0)) < 1e-9));
        assert!(pre.points.iter().any(|q| q.dist(Point::new(-99.0, -99.0)) < 1e-6));
        assert_eq!(pre.points.len(), 3);
        assert!(pre.ill_conditioned);
    }

    #[test]
    fn preimages_can_be_empty() {
        // λ > 1: the quartic for this target has two complex pairs
        let p = Params::new(1.5, 2.0).unwrap();
        let pre = preimages(&p, Point::new(0.0, 1.0));
        assert!(pre.points.is_empty());
        assert!(!pre.ill_conditioned);
    }
}
