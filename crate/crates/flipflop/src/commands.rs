use flipflop_core::chaos::{horseshoe_witness, lyapunov as lyapunov_exponents, lyapunov_along, saddle_orbit, StaggerConfig};
use flipflop_core::curve::{
    attracting_set, cascade_scan, classify_cloud, detect_cycle, picard_solve, rotation_number,
    CloudStructure, PicardOptions, ScanOptions,
};
use flipflop_core::equilibria::{fixed_points as all_fixed_points, hopf_coefficients, interior_fixed_point, mu_h};
use flipflop_core::map::{self, Params};
use flipflop_core::{Error as CoreError, Point};
use serde::Serialize;

use crate::config::{Format, Resolver, Settings};
use crate::output::num;
use crate::svg::{Layer, Plot};
use crate::Failure;

const ALL: &[Format] = &[Format::Csv, Format::Json, Format::Svg];
const DATA: &[Format] = &[Format::Csv, Format::Json];

const SINK_MU: f64 = 4.5;
const CURVE_MU: f64 = 4.5449;
const HORSESHOE_MU: f64 = 5.0;
const ORBIT_SEED: Point = Point::new(0.564, 0.342);
/// Default seeds near the interior fixed point sit this far to its right.
const SEED_OFFSET: f64 = 1e-3;

pub const BLUE: &str = "#1f4e99";
pub const RED: &str = "#c0392b";
pub const GREY: &str = "#888888";
pub const GREEN: &str = "#2e8b57";

/// The serialized tag of a unit enum variant, for CSV cells.
pub fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn title(name: &str, p: &Params) -> String {
    format!("{name}, lambda = {}, mu = {}", p.lambda(), p.mu())
}

pub fn structure_value(s: &CloudStructure) -> (String, usize) {
    match *s {
        CloudStructure::Loops { count } => ("loops".into(), count),
        CloudStructure::Periodic { period } => ("periodic".into(), period),
        CloudStructure::Inconclusive { clusters, .. } => ("inconclusive".into(), clusters),
        CloudStructure::Escaped { step } => ("escaped".into(), step),
    }
}

#[derive(Serialize)]
struct OrbitSummary {
    iterates: usize,
    rows: usize,
    escaped: Option<usize>,
    last: Option<Point>,
}

pub fn orbit(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("orbit", s);
    let params = r.params(SINK_MU)?;
    let seed = r.seed(ORBIT_SEED)?;
    let n = r.iters(1000);
    let mut out = r.output(ALL, &[Format::Csv])?;

    let orbit = map::orbit(&params, seed, n);
    if let Some(k) = orbit.escaped {
        out.note(format!("orbit escaped at iterate {k}; rows stop before it"));
    }
    out.csv("orbit", &["n", "x", "y"], |w| {
        for (i, p) in orbit.points.iter().enumerate() {
            w.write_record([i.to_string(), num(p.x), num(p.y)])?;
        }
        Ok(())
    })?;
    out.json(
        "orbit",
        &OrbitSummary {
            iterates: n,
            rows: orbit.points.len(),
            escaped: orbit.escaped,
            last: orbit.points.last().copied(),
        },
    )?;
    out.svg(
        "orbit",
        &Plot::new(title("orbit", &params))
            .with(Layer::dots("orbit", &orbit.points, BLUE))
            .with(Layer::marker("seed", seed, RED)),
    )?;
    match orbit.escaped {
        Some(k) => Err(Failure::Inconclusive(format!("orbit escaped at iterate {k}"))),
        None => Ok(()),
    }
}

pub fn fixed_points(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("fixed-points", s);
    let params = r.params(SINK_MU)?;
    let out = r.output(DATA, &[Format::Json])?;

    let fps = all_fixed_points(&params);
    out.csv(
        "fixed_points",
        &["family", "stability", "x", "y", "re1", "im1", "re2", "im2"],
        |w| {
            for f in &fps {
                let [e1, e2] = f.eigenvalues;
                w.write_record([
                    tag(&f.family),
                    tag(&f.stability),
                    num(f.location.x),
                    num(f.location.y),
                    num(e1.re),
                    num(e1.im),
                    num(e2.re),
                    num(e2.im),
                ])?;
            }
            Ok(())
        },
    )?;
    out.json("fixed_points", &fps)
}

#[derive(Serialize)]
struct HopfReport {
    lambda: f64,
    mu_h: f64,
    x_star: f64,
    y_star: f64,
    sigma: [f64; 2],
    sigma_modulus: f64,
    a: f64,
    b: f64,
}

pub fn hopf(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("hopf", s);
    let lambda = r.lambda()?;
    let tol = r.tol(1e-12)?;
    let out = r.output(DATA, &[Format::Json])?;

    let mh = mu_h(lambda, tol)?;
    let h = hopf_coefficients(&Params::new(lambda, mh)?)?;
    let report = HopfReport {
        lambda,
        mu_h: mh,
        x_star: h.interior.x,
        y_star: h.interior.y,
        sigma: [h.sigma.re, h.sigma.im],
        sigma_modulus: h.sigma.norm(),
        a: h.a,
        b: h.b,
    };
    out.csv(
        "hopf",
        &["lambda", "mu_h", "x_star", "y_star", "sigma_re", "sigma_im", "sigma_modulus"],
        |w| {
            w.write_record(
                [
                    report.lambda,
                    report.mu_h,
                    report.x_star,
                    report.y_star,
                    report.sigma[0],
                    report.sigma[1],
                    report.sigma_modulus,
                ]
                .map(num),
            )
        },
    )?;
    out.json("hopf", &report)
}

#[derive(Serialize)]
struct CurveReport {
    mu_h: f64,
    nu: f64,
    center: Point,
    grid: usize,
    sweeps: usize,
    converged: bool,
    last_change: Option<f64>,
    residual: f64,
    winding_number: i64,
    max_radius: f64,
}

pub fn curve(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("curve", s);
    let params = r.params(CURVE_MU)?;
    let grid = r.grid(flipflop_core::curve::DEFAULT_GRID)?;
    let tol = r.tol(1e-13)?;
    let max_iter = r.iters(2_000_000);
    let max_residual = r.max_residual(1e-3)?;
    let mut out = r.output(ALL, DATA)?;

    let center = interior_fixed_point(&params)?;
    let opts = PicardOptions {
        grid,
        max_iter,
        tol,
        ..PicardOptions::default()
    };
    let run = picard_solve(&params, center, &opts)?;
    let c = &run.curve;
    let report = CurveReport {
        mu_h: params.mu() - c.nu(),
        nu: c.nu(),
        center,
        grid,
        sweeps: run.iterations,
        converged: run.converged,
        last_change: run.history.last().copied(),
        residual: c.residual(),
        winding_number: c.winding_number(),
        max_radius: c.max_radius(),
    };
    if !run.converged {
        out.note(format!("not converged after {} sweeps", run.iterations));
    }

    let points = c.points();
    out.csv("curve", &["i", "theta", "rho", "x", "y"], |w| {
        for (i, p) in points.iter().enumerate() {
            w.write_record([i.to_string(), num(c.theta(i)), num(c.rhos()[i]), num(p.x), num(p.y)])?;
        }
        Ok(())
    })?;
    out.json("curve", &report)?;
    out.svg(
        "curve",
        &Plot::new(title("invariant curve", &params))
            .with(Layer::line("curve", &points, BLUE, true))
            .with(Layer::marker("center", center, RED)),
    )?;

    if !run.converged {
        return Err(Failure::Inconclusive(format!(
            "curve did not converge in {} sweeps (last change {:e})",
            run.iterations,
            report.last_change.unwrap_or(f64::NAN)
        )));
    }
    if report.winding_number != 1 {
        return Err(Failure::Assertion(format!("winding number {}", report.winding_number)));
    }
    if !(report.residual <= max_residual) {
        return Err(Failure::Assertion(format!(
            "invariance residual {:e} exceeds {max_residual:e}",
            report.residual
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct RotationReport {
    center: Point,
    value: f64,
    stderr: f64,
    n_iterates: usize,
    /// Period of the orbit tail when it is a cycle.
    period: Option<usize>,
}

const CYCLE_TAIL: usize = 6000;

pub fn rotation(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("rotation", s);
    let params = r.params(CURVE_MU)?;
    let center = interior_fixed_point(&params)?;
    let seed = r.seed(center + Point::new(SEED_OFFSET, 0.0))?;
    let transient = r.transient(1000);
    let n = r.iters(100_000);
    let out = r.output(DATA, &[Format::Json])?;

    let est = rotation_number(&params, center, seed, transient, n)?;
    let tail = attracting_set(&params, seed, transient, n.min(CYCLE_TAIL))?;
    let report = RotationReport {
        center,
        value: est.value,
        stderr: est.stderr,
        n_iterates: est.n_iterates,
        period: detect_cycle(&tail, tail.len() / 3, 1e-9),
    };
    out.csv("rotation", &["value", "stderr", "n_iterates", "period"], |w| {
        w.write_record([
            num(report.value),
            num(report.stderr),
            report.n_iterates.to_string(),
            report.period.map(|q| q.to_string()).unwrap_or_default(),
        ])
    })?;
    out.json("rotation", &report)
}

pub fn cascade(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("cascade", s);
    let lambda = r.lambda()?;
    let range = r.nu_range((1e-3, 0.2))?;
    let steps = r.steps(20)?;
    let transient = r.transient(10_000);
    let samples = r.iters(10_000);
    let mut out = r.output(DATA, DATA)?;

    let opts = ScanOptions {
        transient,
        samples,
        ..ScanOptions::default()
    };
    let report = cascade_scan(lambda, range, steps, &opts)?;
    for n in &report.notes {
        out.note(n.clone());
    }
    out.csv("cascade", &["nu", "mu", "kind", "value"], |w| {
        for rec in &report.records {
            let (kind, value) = structure_value(&rec.structure);
            w.write_record([num(rec.nu), num(rec.mu), kind, value.to_string()])?;
        }
        Ok(())
    })?;
    out.json("cascade", &report)
}

#[derive(Serialize)]
struct LyapunovReport {
    method: &'static str,
    exponents: [f64; 2],
    n: usize,
    transient: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    jumps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_jump: Option<f64>,
}

pub fn lyapunov(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("lyapunov", s);
    let params = r.params(SINK_MU)?;
    let seed = r.seed(ORBIT_SEED)?;
    let n = r.iters(100_000);
    let transient = r.transient(1000);
    let stagger = r.stagger();
    let rng_seed = stagger.then(|| r.rng_seed());
    let out = r.output(DATA, &[Format::Json])?;

    let report = match rng_seed {
        None => {
            let l = lyapunov_exponents(&params, seed, n, transient).map_err(|e| match e {
                CoreError::Escaped { step } => Failure::Inconclusive(format!(
                    "orbit escaped at iterate {step}; try --stagger"
                )),
                other => other.into(),
            })?;
            LyapunovReport {
                method: "orbit",
                exponents: l.exponents,
                n,
                transient,
                jumps: None,
                max_jump: None,
            }
        }
        Some(rng_seed) => {
            let cfg = StaggerConfig {
                rng_seed,
                ..StaggerConfig::default()
            };
            let orbit = saddle_orbit(&params, seed, transient + n, &cfg)?;
            let tail = orbit.points.get(transient..).unwrap_or(&[]);
            let exponents = lyapunov_along(&params, tail)
                .ok_or_else(|| Failure::Inconclusive("pseudo-orbit too short".into()))?;
            LyapunovReport {
                method: "stagger",
                exponents,
                n,
                transient,
                jumps: Some(orbit.jumps),
                max_jump: Some(orbit.max_jump),
            }
        }
    };
    out.csv("lyapunov", &["method", "lambda1", "lambda2", "n"], |w| {
        w.write_record([
            report.method.to_string(),
            num(report.exponents[0]),
            num(report.exponents[1]),
            n.to_string(),
        ])
    })?;
    out.json("lyapunov", &report)
}

#[derive(Serialize)]
struct HorseshoeReport<'a> {
    holds: bool,
    key_points: &'a [flipflop_core::chaos::KeyPointCheck],
    diagonal_crossing: bool,
    component_count: usize,
    components: &'a [usize],
    containment: &'a [flipflop_core::chaos::ContainmentCheck],
    ellipse: flipflop_core::chaos::EllipseRegion,
    resolution: usize,
    grid: usize,
    inconclusive: bool,
}

pub fn horseshoe(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("horseshoe", s);
    let params = r.params(HORSESHOE_MU)?;
    let resolution = r.resolution(1000);
    let grid = r.grid(512)?;
    let mut out = r.output(ALL, &[Format::Json])?;

    let w = horseshoe_witness(&params, resolution, grid)?;
    if w.containment.iter().any(|c| !c.inside) {
        out.note("some corner points of the first image lie outside the ellipse");
    }
    let report = HorseshoeReport {
        holds: w.holds(),
        key_points: &w.key_points,
        diagonal_crossing: w.diagonal_crossing,
        component_count: w.component_count(),
        components: &w.components,
        containment: &w.containment,
        ellipse: w.ellipse,
        resolution,
        grid,
        inconclusive: w.inconclusive,
    };
    out.csv(
        "horseshoe",
        &["check", "x", "y", "expected_x", "expected_y", "observed_x", "observed_y", "pass"],
        |csv| {
            for k in &w.key_points {
                csv.write_record([
                    "key_point".to_string(),
                    num(k.input.x),
                    num(k.input.y),
                    num(k.expected.x),
                    num(k.expected.y),
                    num(k.observed.x),
                    num(k.observed.y),
                    k.pass.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    out.json("horseshoe", &report)?;
    let boundary: Vec<Point> = (0..360)
        .map(|k| w.ellipse.point(1.0, std::f64::consts::TAU * k as f64 / 360.0))
        .collect();
    let mut plot = Plot::new(title("horseshoe", &params))
        .with(Layer::dots("image 2", &w.image2, GREY))
        .with(Layer::dots("image 1", &w.image1, BLUE))
        .with(Layer::line("ellipse", &boundary, RED, true));
    for k in &w.key_points {
        plot = plot.with(Layer::marker("key point", k.observed, GREEN));
    }
    out.svg("horseshoe", &plot)?;

    if w.inconclusive {
        Err(Failure::Inconclusive(format!(
            "resolution {resolution} is below {}",
            flipflop_core::chaos::MIN_RESOLUTION
        )))
    } else if !w.holds() {
        Err(Failure::Assertion(format!(
            "key points pass: {}, diagonal crossing: {}, components: {}",
            w.key_points_pass(),
            w.diagonal_crossing,
            w.component_count()
        )))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct SweepRecord {
    mu: f64,
    seed: Point,
    structure: CloudStructure,
}

pub fn sweep(s: Settings) -> Result<(), Failure> {
    let mut r = Resolver::new("sweep", s);
    let lambda = r.lambda()?;
    let (lo, hi) = r.mu_range((4.5, 5.0))?;
    let steps = r.steps(200)?;
    let fixed_seed = if r.seed_given() {
        Some(r.seed(ORBIT_SEED)?)
    } else {
        None
    };
    let transient = r.transient(10_000);
    let samples = r.iters(1000);
    let mut out = r.output(ALL, &[Format::Csv])?;
    if fixed_seed.is_none() {
        out.note(format!("each mu is seeded at p* + ({SEED_OFFSET}, 0)"));
    }

    let opts = ScanOptions::default();
    let mut records = Vec::with_capacity(steps);
    let mut clouds = Vec::with_capacity(steps);
    for k in 0..steps {
        let mu = if steps == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (steps - 1) as f64
        };
        let params = Params::new(lambda, mu)?;
        let seed = match fixed_seed {
            Some(p) => p,
            None => interior_fixed_point(&params)? + Point::new(SEED_OFFSET, 0.0),
        };
        let (structure, cloud) = match attracting_set(&params, seed, transient, samples) {
            Ok(cloud) => (classify_cloud(&cloud, &opts), cloud),
            Err(CoreError::Escaped { step }) => (CloudStructure::Escaped { step }, Vec::new()),
            Err(e) => return Err(e.into()),
        };
        records.push(SweepRecord { mu, seed, structure });
        clouds.push(cloud);
    }

    out.csv("sweep", &["mu", "x", "y", "loops"], |w| {
        for (rec, cloud) in records.iter().zip(&clouds) {
            let loops = match rec.structure {
                CloudStructure::Loops { count } => count,
                _ => 0,
            };
            for p in cloud {
                w.write_record([num(rec.mu), num(p.x), num(p.y), loops.to_string()])?;
            }
        }
        Ok(())
    })?;
    out.json("sweep", &records)?;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let diagram: Vec<Point> = records
        .iter()
        .zip(&clouds)
        .flat_map(|(rec, cloud)| cloud.iter().map(move |p| Point::new((rec.mu - lo) / span, p.x)))
        .collect();
    let mut plot = Plot::new(format!("bifurcation diagram, lambda = {lambda}"));
    plot.x_label = format!("(mu - {lo}) / {span}");
    out.svg("sweep", &plot.with(Layer::dots("x", &diagram, BLUE)))
}
