//! Invariant closed curves around the interior fixed point past the
//! Neimark–Sacker threshold, rotation numbers, cycle detection and the scan
//! for curve-doubling.
//!
//! A curve is stored in polar form `ρ(θ)` about `p*` on a uniform grid of
//! `M` angles. It is invariant when the translated map sends each point
//! `(ρ(θ), θ)` to `(ρ(Θ), Θ)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::equilibria::{interior_fixed_point, mu_h};
use crate::geometry::{self, LoopShape};
use crate::map::{step, Params, Point, PolarPoint, TranslatedMap};
use crate::{wrap_angle, Error, Result, TAU};

pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 512;

/// Tolerance used when locating μ_h for the ν = μ − μ_h bookkeeping.
pub const MU_H_TOL: f64 = 1e-12;

/// How `ρ` is evaluated between grid angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Interpolation {
    /// Periodic piecewise-linear.
    #[default]
    Linear,
    /// Periodic four-point Lagrange.
    Cubic,
}

/// Lagrange interpolation through four `(t, y)` nodes.
fn lagrange4(t: f64, n: [(f64, f64); 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = n[i].1;
        for j in 0..4 {
            if i != j {
                w *= (t - n[j].0) / (n[i].0 - n[j].0);
            }
        }
        acc += w;
    }
    acc
}

/// Periodic samples of a function on a uniform grid `phase + i·2π/M`.
fn eval_uniform(values: &[f64], phase: f64, theta: f64, interp: Interpolation) -> f64 {
    let m = values.len();
    let h = TAU / m as f64;
    let s = wrap_angle(theta - phase) / h;
    let i0 = libm::floor(s) as usize % m;
    let f = s - libm::floor(s);
    let at = |k: isize| values[k.rem_euclid(m as isize) as usize];
    match interp {
        Interpolation::Linear => (1.0 - f) * at(i0 as isize) + f * at(i0 as isize + 1),
        Interpolation::Cubic => {
            let i = i0 as isize;
            lagrange4(
                f,
                [(-1.0, at(i - 1)), (0.0, at(i)), (1.0, at(i + 1)), (2.0, at(i + 2))],
            )
        }
    }
}

/// `ρ` sampled on the grid `phase + 2πi/M`, `i = 0..M`, about the fixed
/// point `center` of the map with parameters `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCurve {
    params: Params,
    nu: f64,
    center: Point,
    phase: f64,
    rhos: Vec<f64>,
    interpolation: Interpolation,
    residual: f64,
}

impl PolarCurve {
    pub fn new(
        params: Params,
        center: Point,
        nu: f64,
        phase: f64,
        rhos: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if rhos.len() < MIN_GRID {
            return Err(Error::InvalidArgument("curve grid needs at least 64 angles"));
        }
        if rhos.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidArgument("radii must be finite and nonnegative"));
        }
        let map = TranslatedMap::new(params, center)?;
        let mut curve = PolarCurve {
            params,
            nu,
            center,
            phase,
            rhos,
            interpolation,
            residual: 0.0,
        };
        curve.residual = curve.defect(&map);
        Ok(curve)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn len(&self) -> usize {
        self.rhos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhos.is_empty()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Max invariance defect, as computed at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.phase + TAU * i as f64 / self.rhos.len() as f64
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        eval_uniform(&self.rhos, self.phase, theta, self.interpolation)
    }

    pub fn max_radius(&self) -> f64 {
        self.rhos.iter().copied().fold(0.0, f64::max)
    }

    /// Grid points in absolute coordinates.
    pub fn points(&self) -> Vec<Point> {
        (0..self.len())
            .map(|i| self.center + PolarPoint::new(self.rhos[i], self.theta(i)).to_cartesian())
            .collect()
    }

    /// `k` points per grid cell along the interpolated curve, absolute
    /// coordinates.
    pub fn dense(&self, k: usize) -> Vec<Point> {
        let n = self.len() * k.max(1);
        (0..n)
            .map(|i| {
                let t = self.phase + TAU * i as f64 / n as f64;
                self.center + PolarPoint::new(self.radius_at(t), t).to_cartesian()
            })
            .collect()
    }

    /// Winding number of the grid polygon about `p*`.
    pub fn winding_number(&self) -> i64 {
        geometry::winding_number(&self.points(), self.center)
    }

    /// The same curve with the grid relabelled `k` steps forward.
    pub fn rotated(&self, k: usize) -> PolarCurve {
        let m = self.len();
        let k = k % m;
        let mut rhos = self.rhos.clone();
        rhos.rotate_left(k);
        PolarCurve {
            phase: self.phase + TAU * k as f64 / m as f64,
            rhos,
            ..self.clone()
        }
    }

    /// Euclidean distance from an absolute point to the interpolated curve,
    /// measured against 16 samples per grid cell.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.dense(16)
            .iter()
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    fn defect(&self, map: &TranslatedMap) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            let q = PolarPoint::new(self.rhos[i], self.theta(i)).to_cartesian();
            let image = map.step(q);
            let target_theta = libm::atan2(image.y, image.x);
            let on_curve = PolarPoint::new(self.radius_at(target_theta), target_theta).to_cartesian();
            worst = worst.max(image.dist(on_curve));
        }
        worst
    }
}

/// Max over the grid of `|Φ̂(ρ(θ), θ) − (ρ(Θ), Θ)|`, with `Θ` the polar
/// angle of the image and `ρ(Θ)` interpolated.
pub fn invariance_residual(params: &Params, curve: &PolarCurve) -> Result<f64> {
    let map = TranslatedMap::new(*params, curve.center)?;
    Ok(curve.defect(&map))
}

/// One application of the invariance operator
/// `ρ ↦ ρ(Θ(ρ(θ), θ)) / U(ρ(θ), θ)` on the grid.
///
/// Its fixed points are invariant curves, but as an iteration it pulls
/// radii toward the repelling fixed point, so [`picard_solve`] iterates the
/// forward graph transform instead.
pub fn invariance_operator(
    map: &TranslatedMap,
    phase: f64,
    rhos: &[f64],
    interpolation: Interpolation,
) -> Vec<f64> {
    let m = rhos.len();
    (0..m)
        .map(|i| {
            let theta = phase + TAU * i as f64 / m as f64;
            let image = map.polar_step(PolarPoint::new(rhos[i], theta));
            eval_uniform(rhos, phase, image.theta, interpolation) / map.stretch(rhos[i], theta)
        })
        .collect()
}

/// Forward graph transform: map every grid point of the curve, then read the
/// image curve back onto the grid. Fails when the image is not a radial
/// graph of degree one.
fn graph_transform(
    map: &TranslatedMap,
    phase: f64,
    rhos: &[f64],
    interpolation: Interpolation,
    angles: &mut Vec<f64>,
    radii: &mut Vec<f64>,
    out: &mut [f64],
) -> core::result::Result<(), &'static str> {
    let m = rhos.len();
    let h = TAU / m as f64;
    angles.clear();
    radii.clear();
    let mut prev = 0.0;
    for (i, &r) in rhos.iter().enumerate() {
        let image = map.polar_step(PolarPoint::new(r, phase + h * i as f64));
        let a = if i == 0 {
            image.theta
        } else {
            let d = wrap_angle(image.theta - prev + core::f64::consts::PI) - core::f64::consts::PI;
            angles[i - 1] + d
        };
        if i > 0 && a <= angles[i - 1] {
            return Err("image folds over in angle");
        }
        prev = image.theta;
        angles.push(a);
        radii.push(image.r);
    }
    let closing = angles[m - 1]
        + (wrap_angle(angles[0] - prev + core::f64::consts::PI) - core::f64::consts::PI);
    if !((closing - angles[0] - TAU).abs() < 1e-6) || closing <= angles[m - 1] {
        return Err("image does not wind once about the center");
    }
    let a0 = angles[0];

    // node i for i in -1..=m+1, wrapped periodically
    let node = |i: isize| -> (f64, f64) {
        let k = i.rem_euclid(m as isize) as usize;
        let turns = i.div_euclid(m as isize) as f64;
        (angles[k] + TAU * turns, radii[k])
    };

    let j0 = (libm::ceil((a0 - phase) / h) as isize).rem_euclid(m as isize) as usize;
    let mut k = 0usize;
    for s in 0..m {
        let j = (j0 + s) % m;
        let t = a0 + wrap_angle(phase + h * j as f64 - a0);
        while k + 1 < m && node(k as isize + 1).0 <= t {
            k += 1;
        }
        let (t0, r0) = node(k as isize);
        let (t1, r1) = node(k as isize + 1);
        out[j] = match interpolation {
            Interpolation::Linear => r0 + (r1 - r0) * (t - t0) / (t1 - t0),
            Interpolation::Cubic => {
                let ki = k as isize;
                lagrange4(t, [node(ki - 1), (t0, r0), (t1, r1), node(ki + 2)])
            }
        };
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub grid: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub interpolation: Interpolation,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            grid: DEFAULT_GRID,
            max_iter: 2_000_000,
            tol: 1e-13,
            interpolation: Interpolation::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    pub curve: PolarCurve,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm change of `ρ` at every sweep.
    pub history: Vec<f64>,
}

/// Invariant curve about `pstar` by successive approximation from `ρ₀ ≡ ν`.
///
/// Each sweep maps the current curve forward and resamples it on the grid.
/// Stops once a sweep changes `ρ` by less than `tol` in max norm, or after
/// `max_iter` sweeps with `converged == false`.
pub fn picard_solve(params: &Params, pstar: Point, options: &PicardOptions) -> Result<PicardRun> {
    if options.grid < MIN_GRID {
        return Err(Error::InvalidArgument("curve grid needs at least 64 angles"));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let threshold = mu_h(params.lambda(), MU_H_TOL)?;
    if params.mu() <= threshold {
        return Err(Error::Subcritical {
            mu: params.mu(),
            mu_h: threshold,
        });
    }
    let nu = params.mu() - threshold;
    let map = TranslatedMap::new(*params, pstar)?;

    let m = options.grid;
    let mut rhos = vec![nu; m];
    let mut next = vec![0.0; m];
    let mut angles = Vec::with_capacity(m);
    let mut radii = Vec::with_capacity(m);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        graph_transform(
            &map,
            0.0,
            &rhos,
            options.interpolation,
            &mut angles,
            &mut radii,
            &mut next,
        )
        .map_err(|reason| Error::NoCurve { reason, iterations })?;
        iterations += 1;
        let mut diff: f64 = 0.0;
        for (a, b) in rhos.iter().zip(&next) {
            diff = diff.max((a - b).abs());
        }
        if next.iter().any(|r| !(r.is_finite() && *r <= 1.0)) {
            return Err(Error::NoCurve {
                reason: "radius exceeded 1",
                iterations,
            });
        }
        if next.iter().any(|r| *r < 0.0) {
            return Err(Error::NoCurve {
                reason: "negative radius",
                iterations,
            });
        }
        core::mem::swap(&mut rhos, &mut next);
        history.push(diff);
        if diff < options.tol {
            converged = true;
            break;
        }
    }
    let curve = PolarCurve::new(*params, pstar, nu, 0.0, rhos, options.interpolation)?;
    Ok(PicardRun {
        curve,
        iterations,
        converged,
        history,
    })
}

/// Iterates `transient + 1 ..= transient + samples` of the orbit of `seed`.
pub fn attracting_set(
    params: &Params,
    seed: Point,
    transient: usize,
    samples: usize,
) -> Result<Vec<Point>> {
    let mut p = crate::map::iterate(params, seed, transient)?;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        p = step(params, p);
        if !(p.x.abs() <= crate::map::ESCAPE_BOUND && p.y.abs() <= crate::map::ESCAPE_BOUND) {
            return Err(Error::Escaped {
                step: transient + k + 1,
            });
        }
        out.push(p);
    }
    Ok(out)
}

pub const MIN_ROTATION_ITERATES: usize = 1000;
const ROTATION_BATCHES: usize = 10;
/// Orbits closer than this to the center have no meaningful angle.
pub const COLLAPSE_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RotationEstimate {
    /// Mean counterclockwise advance per iterate, in turns, in `[0, 1)`.
    pub value: f64,
    pub n_iterates: usize,
    /// Standard error from batch means.
    pub stderr: f64,
}

/// Rotation number of a finite orbit about `center`. Each advance is taken
/// as the counterclockwise angle in `[0, 2π)` from one iterate to the next.
pub fn rotation_of_orbit(points: &[Point], center: Point) -> Result<RotationEstimate> {
    let n = points.len().saturating_sub(1);
    if n < MIN_ROTATION_ITERATES {
        return Err(Error::InvalidArgument("rotation number needs at least 1000 iterates"));
    }
    let mut angles = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let d = *p - center;
        if d.norm() < COLLAPSE_RADIUS {
            return Err(Error::Collapsed { step: k });
        }
        angles.push(libm::atan2(d.y, d.x));
    }
    let advances: Vec<f64> = angles.windows(2).map(|w| wrap_angle(w[1] - w[0])).collect();
    let total: f64 = advances.iter().sum();
    let value = total / (TAU * n as f64);

    let batch = n / ROTATION_BATCHES;
    let means: Vec<f64> = (0..ROTATION_BATCHES)
        .map(|b| advances[b * batch..(b + 1) * batch].iter().sum::<f64>() / (TAU * batch as f64))
        .collect();
    let mean = means.iter().sum::<f64>() / ROTATION_BATCHES as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
        / (ROTATION_BATCHES - 1) as f64;
    Ok(RotationEstimate {
        value: if value >= 1.0 { value - 1.0 } else { value },
        n_iterates: n,
        stderr: libm::sqrt(var / ROTATION_BATCHES as f64),
    })
}

/// Rotation number about `pstar` of the orbit of `seed`, measured over `n`
/// iterates after discarding `transient`.
pub fn rotation_number(
    params: &Params,
    pstar: Point,
    seed: Point,
    transient: usize,
    n: usize,
) -> Result<RotationEstimate> {
    if n < MIN_ROTATION_ITERATES {
        return Err(Error::InvalidArgument("rotation number needs at least 1000 iterates"));
    }
    let start = crate::map::iterate(params, seed, transient)?;
    let orbit = crate::map::orbit(params, start, n);
    if let Some(k) = orbit.escaped {
        return Err(Error::Escaped { step: transient + k });
    }
    rotation_of_orbit(&orbit.points, pstar).map_err(|e| match e {
        Error::Collapsed { step } => Error::Collapsed {
            step: step + transient,
        },
        other => other,
    })
}

/// Smallest `q ≤ max_period` with `|p[i + q] − p[i]| < tol` throughout the
/// tail. `None` if there is none or the tail is shorter than
/// `3 · max_period`.
pub fn detect_cycle(tail: &[Point], max_period: usize, tol: f64) -> Option<usize> {
    if max_period == 0 || tail.len() < 3 * max_period {
        return None;
    }
    (1..=max_period).find(|&q| (0..tail.len() - q).all(|i| tail[i + q].dist(tail[i]) < tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub transient: usize,
    pub samples: usize,
    /// Seed offset from `p*` along `x`.
    pub seed_offset: f64,
    /// Clustering radius in units of the 99th percentile of
    /// nearest-neighbour spacings.
    pub link_factor: f64,
    /// A cluster is a loop only if its largest angular gap is below this
    /// multiple of the mean gap or `gap_floor`, whichever is larger.
    pub gap_factor: f64,
    /// Angular gap in radians that never disqualifies a loop.
    pub gap_floor: f64,
    pub max_roughness: f64,
    pub max_period: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            transient: 10_000,
            samples: 10_000,
            seed_offset: 1e-3,
            link_factor: 3.0,
            gap_factor: 10.0,
            gap_floor: 0.1,
            max_roughness: 0.25,
            max_period: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum CloudStructure {
    /// Every cluster passed the closed-loop test.
    Loops { count: usize },
    /// The cloud is a periodic orbit.
    Periodic { period: usize },
    /// Clusters that are not all closed loops.
    Inconclusive { clusters: usize, loops: usize },
    Escaped { step: usize },
}

/// Smallest cluster the closed-loop test is applied to.
const MIN_LOOP_POINTS: usize = 8;
const MAX_COARSENING: usize = 4;

/// Splits a cloud into single-linkage clusters and tests each for a closed
/// loop. The linkage radius follows the sparsest 1% of the cloud, since
/// orbits near a resonance fill their loop very unevenly. When that still
/// leaves clusters too small to test, as for an orbit near a long periodic
/// one that visits many tight groups, each cluster is replaced by its
/// centroid and the centroids are clustered again.
pub fn classify_cloud(cloud: &[Point], options: &ScanOptions) -> CloudStructure {
    if let Some(q) = detect_cycle(cloud, options.max_period.min(cloud.len() / 3), 1e-9) {
        return CloudStructure::Periodic { period: q };
    }
    let mut points = cloud.to_vec();
    let mut clusters = Vec::new();
    for _ in 0..MAX_COARSENING {
        let nn = geometry::nearest_neighbor_distances(&points);
        let Some(spacing) = geometry::quantile(&nn, 0.99) else {
            return CloudStructure::Inconclusive { clusters: 0, loops: 0 };
        };
        clusters = geometry::single_linkage(&points, options.link_factor * spacing);
        let small = clusters.iter().any(|c| c.len() < MIN_LOOP_POINTS);
        if !small || clusters.len() < MIN_LOOP_POINTS || clusters.len() == points.len() {
            break;
        }
        points = clusters
            .iter()
            .map(|c| geometry::centroid(&c.iter().map(|&i| points[i]).collect::<Vec<_>>()))
            .collect();
    }
    let loops = clusters
        .iter()
        .filter(|c| {
            let pts: Vec<Point> = c.iter().map(|&i| points[i]).collect();
            LoopShape::of(&pts).is_some_and(|s| {
                s.max_gap < (options.gap_factor * s.mean_gap).max(options.gap_floor)
                    && s.radial_roughness < options.max_roughness
            })
        })
        .count();
    if loops == clusters.len() {
        CloudStructure::Loops { count: loops }
    } else {
        CloudStructure::Inconclusive {
            clusters: clusters.len(),
            loops,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CascadeRecord {
    pub nu: f64,
    pub mu: f64,
    pub structure: CloudStructure,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CascadeReport {
    pub lambda: f64,
    pub mu_h: f64,
    /// ν values at which the loop count doubled.
    pub nu_breaks: Vec<f64>,
    /// Loop count before the first break, then after each break.
    pub cycle_multiplicities: Vec<usize>,
    pub notes: Vec<String>,
    pub records: Vec<CascadeRecord>,
}

/// Attracting sets on an even grid of `steps` values of `ν` in
/// `[nu_range.0, nu_range.1]`, each seeded at `p* + (seed_offset, 0)`.
pub fn cascade_scan(
    lambda: f64,
    nu_range: (f64, f64),
    steps: usize,
    options: &ScanOptions,
) -> Result<CascadeReport> {
    if !(nu_range.0 > 0.0 && nu_range.1 >= nu_range.0) {
        return Err(Error::InvalidArgument("nu range must be positive and ordered"));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("scan needs at least one step"));
    }
    let threshold = mu_h(lambda, MU_H_TOL)?;
    let mut report = CascadeReport {
        lambda,
        mu_h: threshold,
        nu_breaks: Vec::new(),
        cycle_multiplicities: Vec::new(),
        notes: Vec::new(),
        records: Vec::with_capacity(steps),
    };
    let mut current: Option<usize> = None;
    for k in 0..steps {
        let nu = if steps == 1 {
            nu_range.0
        } else {
            nu_range.0 + (nu_range.1 - nu_range.0) * k as f64 / (steps - 1) as f64
        };
        let mu = threshold + nu;
        let params = Params::new(lambda, mu)?;
        let structure = match interior_fixed_point(&params) {
            Err(_) => {
                report.notes.push(format!("nu = {nu:e}: no interior fixed point"));
                CloudStructure::Inconclusive { clusters: 0, loops: 0 }
            }
            Ok(pstar) => {
                let seed = pstar + Point::new(options.seed_offset, 0.0);
                match attracting_set(&params, seed, options.transient, options.samples) {
                    Ok(cloud) => classify_cloud(&cloud, options),
                    Err(Error::Escaped { step }) => CloudStructure::Escaped { step },
                    Err(e) => return Err(e),
                }
            }
        };
        match structure {
            CloudStructure::Loops { count } => match current {
                None => {
                    current = Some(count);
                    report.cycle_multiplicities.push(count);
                }
                Some(c) if count == 2 * c => {
                    report.nu_breaks.push(nu);
                    report.cycle_multiplicities.push(count);
                    current = Some(count);
                }
                Some(c) if count != c => {
                    report
                        .notes
                        .push(format!("nu = {nu:e}: loop count {c} -> {count} is not a doubling"));
                }
                _ => {}
            },
            CloudStructure::Inconclusive { clusters, loops } => report.notes.push(format!(
                "nu = {nu:e}: inconclusive, {clusters} clusters of which {loops} closed loops"
            )),
            CloudStructure::Escaped { step } => {
                report.notes.push(format!("nu = {nu:e}: orbit escaped at iterate {step}"))
            }
            CloudStructure::Periodic { period } => {
                report.notes.push(format!("nu = {nu:e}: periodic orbit of period {period}"))
            }
        }
        report.records.push(CascadeRecord { nu, mu, structure });
    }
    Ok(report)
}
