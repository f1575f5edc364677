//! Fixed points, their spectra, and the Neimark–Sacker threshold μ_h(λ).
//!
//! Besides the two axis fixed points `(1, 0)` and `(1/λ, 0)`, off-axis fixed
//! points lie on the line `y = x − 1/μ` with `x` a root of
//! `(1 − λ)x² + (1 + λ − 1/μ)x − 1 = 0`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::map::{jacobian, step, Params, Point};
use crate::{Error, Result};

/// Eigenvalue moduli within this distance of 1 count as neutral.
pub const NEUTRAL_BAND: f64 = 1e-9;

const FIXED_TOL: f64 = 1e-10;
const HOPF_LAMBDA: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stability {
    Saddle,
    Source,
    Sink,
    SpiralSink,
    SpiralSource,
    /// Complex pair on the unit circle.
    Neutral,
    /// Real spectrum with a modulus on the unit circle.
    NonHyperbolicReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    /// `(1, 0)`
    AxisUnit,
    /// `(1/λ, 0)`
    AxisReciprocal,
    /// The `+√` root of the off-axis quadratic. For `0 < λ < 1` this is the
    /// positive root, which lies in the triangle `0 ≤ y ≤ x ≤ 1` when μ > 1.
    Interior,
    /// The `−√` root, far from the triangle.
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FixedPoint {
    pub location: Point,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
    pub family: Family,
}

pub fn classify_spectrum(eigenvalues: &[Complex64; 2]) -> Stability {
    let [e0, e1] = eigenvalues;
    let (m0, m1) = (e0.norm(), e1.norm());
    if e0.im != 0.0 {
        if (m0 - 1.0).abs() < NEUTRAL_BAND {
            Stability::Neutral
        } else if m0 < 1.0 {
            Stability::SpiralSink
        } else {
            Stability::SpiralSource
        }
    } else if (m0 - 1.0).abs() < NEUTRAL_BAND || (m1 - 1.0).abs() < NEUTRAL_BAND {
        Stability::NonHyperbolicReal
    } else if m0 > 1.0 && m1 > 1.0 {
        Stability::Source
    } else if m0 < 1.0 && m1 < 1.0 {
        Stability::Sink
    } else {
        Stability::Saddle
    }
}

fn fixed_residual(params: &Params, p: Point) -> f64 {
    step(params, p).dist(p)
}

// Off-axis points can sit at |x| ~ 1/(1−λ); their residual is judged
// relative to the size of the quadratic terms.
fn is_fixed(params: &Params, p: Point) -> bool {
    fixed_residual(params, p) < FIXED_TOL * (p.norm() * p.norm()).max(1.0)
}

fn newton_polish(params: &Params, p: Point) -> Point {
    let f = step(params, p) - p;
    let j = jacobian(params, p);
    let (a, b, c, d) = (j.j11 - 1.0, j.j12, j.j21, j.j22 - 1.0);
    let det = a * d - b * c;
    if det == 0.0 || !det.is_finite() {
        return p;
    }
    let q = Point::new(p.x - (d * f.x - b * f.y) / det, p.y - (-c * f.x + a * f.y) / det);
    if q.is_finite() && fixed_residual(params, q) <= fixed_residual(params, p) {
        q
    } else {
        p
    }
}

/// Closed-form `x` coordinates of the off-axis fixed points, `(+√ root, −√ root)`.
/// Either may be absent.
pub fn off_axis_roots(params: &Params) -> (Option<f64>, Option<f64>) {
    let (l, m) = (params.lambda(), params.mu());
    let a2 = 1.0 - l;
    let b1 = 1.0 + l - 1.0 / m;
    if l == 1.0 {
        return if b1 != 0.0 { (Some(1.0 / b1), None) } else { (None, None) };
    }
    let disc = b1 * b1 + 4.0 * a2;
    if disc < 0.0 {
        return (None, None);
    }
    let sq = libm::sqrt(disc);
    let finite = |x: f64| x.is_finite().then_some(x);
    if b1 >= 0.0 {
        let q = -0.5 * (b1 + sq);
        (finite(-1.0 / q), finite(q / a2))
    } else {
        let q = 0.5 * (sq - b1);
        (finite(q / a2), finite(-1.0 / q))
    }
}

fn build(params: &Params, location: Point, family: Family) -> FixedPoint {
    let eigenvalues = jacobian(params, location).eigenvalues();
    FixedPoint {
        location,
        eigenvalues,
        stability: classify_spectrum(&eigenvalues),
        family,
    }
}

/// All fixed points in the order axis-unit, axis-reciprocal, interior,
/// exterior. Off-axis points are omitted when the quadratic has no real
/// roots. Families can coincide in location at μ = 1 or μ = λ.
pub fn fixed_points(params: &Params) -> Vec<FixedPoint> {
    let mut out = Vec::with_capacity(4);
    out.push(build(params, Point::new(1.0, 0.0), Family::AxisUnit));
    out.push(build(params, Point::new(1.0 / params.lambda(), 0.0), Family::AxisReciprocal));
    let inv_mu = 1.0 / params.mu();
    let (plus, minus) = off_axis_roots(params);
    for (x, family) in [(plus, Family::Interior), (minus, Family::Exterior)] {
        if let Some(x) = x {
            let p = newton_polish(params, Point::new(x, x - inv_mu));
            out.push(build(params, p, family));
        }
    }
    out
}

pub fn interior_fixed_point(params: &Params) -> Result<Point> {
    fixed_points(params)
        .into_iter()
        .find(|f| f.family == Family::Interior)
        .map(|f| f.location)
        .ok_or(Error::NoInteriorFixedPoint)
}

/// Spectrum, stability class and family of a point already known to be fixed.
pub fn classify(params: &Params, location: Point) -> Result<FixedPoint> {
    if !location.is_finite() || !is_fixed(params, location) {
        return Err(Error::NotFixed {
            residual: fixed_residual(params, location),
        });
    }
    let scale = location.norm().max(1.0);
    let family = if location.dist(Point::new(1.0, 0.0)) < 1e-8 {
        Family::AxisUnit
    } else if location.dist(Point::new(1.0 / params.lambda(), 0.0)) < 1e-8 * scale {
        Family::AxisReciprocal
    } else {
        let (plus, minus) = off_axis_roots(params);
        let d = |x: Option<f64>| x.map_or(f64::INFINITY, |x| (location.x - x).abs());
        if d(plus) <= d(minus) {
            Family::Interior
        } else {
            Family::Exterior
        }
    };
    Ok(build(params, location, family))
}

/// Trace `a`, determinant `b` and the eigenvalue `σ = (a + i√(4b − a²))/2`
/// of the linearization at the interior fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HopfCoefficients {
    pub a: f64,
    pub b: f64,
    pub sigma: Complex64,
    pub interior: Point,
    /// For λ = 0.99 only: the same coefficients from the one-parameter
    /// closed forms.
    pub specialized: Option<SpecializedCoefficients>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpecializedCoefficients {
    pub x_star: f64,
    pub a: f64,
    pub b: f64,
}

/// Closed-form `(a, b)` in terms of the interior abscissa `x*`:
///
/// ```text
/// a = (2λ − μ − 1) x* + (2 − λ + 1/μ)
/// b = μ { [λ(4/μ − 1) − 2(1 + 1/μ)] x* + 2[1 − (λ − 1/μ)/μ] }
/// ```
pub fn trace_det_closed_form(params: &Params) -> Result<(f64, f64, Point)> {
    let p = interior_fixed_point(params)?;
    let (l, m) = (params.lambda(), params.mu());
    let im = 1.0 / m;
    let x = p.x;
    let a = (2.0 * l - m - 1.0) * x + (2.0 - l + im);
    let b = m * ((l * (4.0 * im - 1.0) - 2.0 * (1.0 + im)) * x + 2.0 * (1.0 - im * (l - im)));
    Ok((a, b, p))
}

/// The λ = 0.99 specialization written directly in μ.
pub fn specialized_coefficients(mu: f64) -> SpecializedCoefficients {
    let im = 1.0 / mu;
    let x = 50.0 * ((im - 1.99) + libm::sqrt((1.99 - im) * (1.99 - im) + 0.04));
    let a = (0.98 - mu) * x + (1.01 + im);
    let b = mu * ((0.99 * (4.0 * im - 1.0) - 2.0 * (1.0 + im)) * x + 2.0 * (1.0 - im * (0.99 - im)));
    SpecializedCoefficients { x_star: x, a, b }
}

pub fn hopf_coefficients(params: &Params) -> Result<HopfCoefficients> {
    let (a, b, interior) = trace_det_closed_form(params)?;
    let disc = 4.0 * b - a * a;
    if !(disc > 0.0) {
        return Err(Error::RealSpectrum { a, b });
    }
    Ok(HopfCoefficients {
        a,
        b,
        sigma: Complex64::new(0.5 * a, 0.5 * libm::sqrt(disc)),
        interior,
        specialized: (params.lambda() == HOPF_LAMBDA)
            .then(|| specialized_coefficients(params.mu())),
    })
}

const BISECTION_MIN_WIDTH: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// The unique μ > 1 at which the interior spectrum crosses the unit circle
/// (`b(λ, μ) = 1`), by bisection. `b` equals λ at μ = 1, dips, and then
/// increases without bound, so it crosses 1 once; the bracket `(1, μ_max]`
/// is doubled until `b(μ_max) > 1`.
pub fn mu_h(lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument("mu_h needs 0 < lambda < 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let b_at = |mu: f64| -> Result<f64> { Ok(trace_det_closed_form(&Params::new(lambda, mu)?)?.1) };
    let mut lo = 1.0;
    let mut hi = 2.0;
    while b_at(hi)? <= 1.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InvalidArgument("no threshold found"));
        }
    }
    let width_goal = tol.max(BISECTION_MIN_WIDTH);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= width_goal {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if b_at(mid)? > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ManifoldKind {
    /// `{(x, 0) : x < x_upper}`
    StableSegment { x_upper: f64 },
    /// The line through the base point with this slope.
    LinearUnstableLine { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ManifoldDescriptor {
    pub base: Point,
    pub kind: ManifoldKind,
}

/// Stable set and linear unstable direction of the saddle `(1, 0)`.
pub fn manifolds_at_unit_fixed_point(
    params: &Params,
) -> Result<(ManifoldDescriptor, ManifoldDescriptor)> {
    if !params.standard_regime() {
        return Err(Error::InvalidArgument("manifolds need 0 < lambda < 1 < mu"));
    }
    let base = Point::new(1.0, 0.0);
    Ok((
        ManifoldDescriptor {
            base,
            kind: ManifoldKind::StableSegment {
                x_upper: 1.0 / params.lambda(),
            },
        },
        ManifoldDescriptor {
            base,
            kind: ManifoldKind::LinearUnstableLine {
                slope: params.lambda() - params.mu(),
            },
        },
    ))
}
