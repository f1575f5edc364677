//! Fixed scenarios with pinned parameters and seeds.
//! Only the sample counts, grid and output options can be changed.

use clap::ValueEnum;
use flipflop_core::chaos::{saddle_orbit, splatter_stats, StaggerConfig};
use flipflop_core::curve::{attracting_set, classify_cloud, picard_solve, CloudStructure, PicardOptions, ScanOptions};
use flipflop_core::equilibria::interior_fixed_point;
use flipflop_core::geometry::hausdorff;
use flipflop_core::map::orbit;
use flipflop_core::Point;
use serde::Serialize;

use crate::commands::{BLUE, GREEN, GREY, RED};
use crate::config::{Format, Resolver, Settings};
use crate::output::{num, Output};
use crate::svg::{Layer, Plot};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
}

const FORMATS: &[Format] = &[Format::Csv, Format::Json, Format::Svg];
const LAMBDA: f64 = 0.99;

/// The points around which the chaotic iterates accumulate.
pub const ACCUMULATION_POINTS: [Point; 4] = [
    Point::new(0.85, 0.0),
    Point::new(0.7, 0.6),
    Point::new(0.4, 0.4),
    Point::new(0.35, 0.0),
];

/// Seeds for the chaotic figure: within 1e-6 of (1, 0), inside the triangle.
pub const CHAOS_SEEDS: [Point; 3] = [
    Point::new(1.0 - 1e-7, 1e-7),
    Point::new(1.0 - 3e-7, 4e-7),
    Point::new(1.0 - 6e-7, 5e-7),
];

pub fn run(id: FigureId, s: Settings) -> Result<(), Failure> {
    let name = id.to_possible_value().expect("no skipped variants").get_name().to_string();
    let r = Resolver::new(&format!("figure {name}"), s).bind()?;
    match id {
        FigureId::Fig2 => fig2(r),
        FigureId::Fig3 => clouds(r, "fig3", 4.5449, &[Point::new(0.555, 0.340), Point::new(0.558, 0.34)], true),
        FigureId::Fig4 => clouds(r, "fig4", 4.55, &[Point::new(0.555, 0.338), Point::new(0.43, 0.38)], false),
        FigureId::Fig6 => fig6(r),
    }
}

#[derive(Serialize)]
struct SpiralReport {
    interior: Point,
    last: Option<Point>,
    distance: Option<f64>,
}

fn fig2(mut r: Resolver) -> Result<(), Failure> {
    let params = r.bound_params(LAMBDA, 4.5)?;
    let seed = Point::new(0.564, 0.342);
    r.bound_seeds(&[seed]);
    let n = r.iters(10_000);
    let mut out = r.output(FORMATS, FORMATS)?;

    let center = interior_fixed_point(&params)?;
    let o = orbit(&params, seed, n);
    if let Some(k) = o.escaped {
        out.note(format!("orbit escaped at iterate {k}"));
    }
    let last = o.points.last().copied();
    out.csv("fig2", &["n", "x", "y"], |w| {
        for (i, p) in o.points.iter().enumerate() {
            w.write_record([i.to_string(), num(p.x), num(p.y)])?;
        }
        Ok(())
    })?;
    out.json(
        "fig2",
        &SpiralReport {
            interior: center,
            last,
            distance: last.map(|p| p.dist(center)),
        },
    )?;
    out.svg(
        "fig2",
        &Plot::new("spiral attractor, lambda = 0.99, mu = 4.5")
            .with(Layer::line("orbit", &o.points, BLUE, false))
            .with(Layer::marker("interior fixed point", center, RED)),
    )?;
    match o.escaped {
        Some(k) => Err(Failure::Inconclusive(format!("orbit escaped at iterate {k}"))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct CloudReport {
    interior: Point,
    structures: Vec<CloudStructure>,
    cloud_hausdorff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<CurveSummary>,
}

#[derive(Serialize)]
struct CurveSummary {
    converged: bool,
    residual: f64,
    winding_number: i64,
    /// Hausdorff distance from the curve to the union of the clouds.
    to_clouds: f64,
}

fn clouds(mut r: Resolver, name: &str, mu: f64, seeds: &[Point], with_curve: bool) -> Result<(), Failure> {
    let params = r.bound_params(LAMBDA, mu)?;
    r.bound_seeds(seeds);
    let transient = r.transient(10_000);
    let samples = r.iters(10_000);
    let grid = if with_curve {
        Some(r.grid(flipflop_core::curve::DEFAULT_GRID)?)
    } else {
        None
    };
    let mut out = r.output(FORMATS, FORMATS)?;

    let center = interior_fixed_point(&params)?;
    let mut sets = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        sets.push(attracting_set(&params, seed, transient, samples)?);
    }
    let opts = ScanOptions::default();
    let structures: Vec<CloudStructure> = sets.iter().map(|c| classify_cloud(c, &opts)).collect();
    let union: Vec<Point> = sets.concat();

    let run = match grid {
        Some(grid) => Some(picard_solve(
            &params,
            center,
            &PicardOptions {
                grid,
                ..PicardOptions::default()
            },
        )?),
        None => None,
    };
    if let Some(run) = &run {
        if !run.converged {
            out.note(format!("curve not converged after {} sweeps", run.iterations));
        }
    }
    let report = CloudReport {
        interior: center,
        cloud_hausdorff: hausdorff(&sets[0], &sets[1]),
        curve: run.as_ref().map(|run| CurveSummary {
            converged: run.converged,
            residual: run.curve.residual(),
            winding_number: run.curve.winding_number(),
            to_clouds: hausdorff(&run.curve.dense(8), &union),
        }),
        structures,
    };

    out.csv(name, &["seed", "n", "x", "y"], |w| {
        for (s, cloud) in sets.iter().enumerate() {
            for (k, p) in cloud.iter().enumerate() {
                w.write_record([s.to_string(), (transient + 1 + k).to_string(), num(p.x), num(p.y)])?;
            }
        }
        Ok(())
    })?;
    if let Some(run) = &run {
        let c = &run.curve;
        let pts = c.points();
        out.csv(&format!("{name}_curve"), &["i", "theta", "rho", "x", "y"], |w| {
            for (i, p) in pts.iter().enumerate() {
                w.write_record([i.to_string(), num(c.theta(i)), num(c.rhos()[i]), num(p.x), num(p.y)])?;
            }
            Ok(())
        })?;
    }
    out.json(name, &report)?;

    let colors = [BLUE, GREEN];
    let mut plot = Plot::new(format!("attracting sets, lambda = 0.99, mu = {mu}"));
    for (s, cloud) in sets.iter().enumerate() {
        plot = plot.with(Layer::dots(format!("seed {s}"), cloud, colors[s % 2]));
    }
    if let Some(run) = &run {
        plot = plot.with(Layer::line("invariant curve", &run.curve.points(), GREY, true));
    }
    out.svg(name, &plot.with(Layer::marker("interior fixed point", center, RED)))?;

    match run {
        Some(run) if !run.converged => Err(Failure::Inconclusive(format!(
            "curve not converged after {} sweeps",
            run.iterations
        ))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct SplatterReport {
    escaped_at: Vec<Option<usize>>,
    bounded_iterates: u64,
    escaped_iterates: u64,
    bins: usize,
    /// Distance from each accumulation point to the nearest top-decile cell
    /// of the plain-orbit histogram; null when the histogram is empty.
    top_decile_distance: Vec<Option<f64>>,
    pseudo_orbit_jumps: usize,
    pseudo_orbit_max_jump: f64,
}

fn fig6(mut r: Resolver) -> Result<(), Failure> {
    let params = r.bound_params(LAMBDA, 5.0)?;
    r.bound_seeds(&CHAOS_SEEDS);
    let n = r.iters(100_000);
    let bins = r.grid(100)?;
    let rng_seed = r.rng_seed();
    let mut out: Output = r.output(FORMATS, FORMATS)?;
    out.note("mu is 5, where the horseshoe is checked and the interior fixed point is (0.5569, 0.3569)");

    let orbits: Vec<_> = CHAOS_SEEDS.iter().map(|&s| orbit(&params, s, n)).collect();
    let hist = splatter_stats(&params, &CHAOS_SEEDS, n, bins)?;
    let stagger = StaggerConfig {
        rng_seed,
        ..StaggerConfig::default()
    };
    let pseudo = saddle_orbit(&params, CHAOS_SEEDS[0], n, &stagger)?;
    let all_escaped = orbits.iter().all(|o| o.escaped.is_some());
    if all_escaped {
        out.note("every plain orbit escaped; the stagger pseudo-orbit is in fig6_saddle");
    }
    let report = SplatterReport {
        escaped_at: orbits.iter().map(|o| o.escaped).collect(),
        bounded_iterates: hist.total,
        escaped_iterates: hist.escaped_iterates,
        bins,
        top_decile_distance: ACCUMULATION_POINTS
            .iter()
            .map(|&p| Some(hist.top_decile_distance(p)).filter(|d| d.is_finite()))
            .collect(),
        pseudo_orbit_jumps: pseudo.jumps,
        pseudo_orbit_max_jump: pseudo.max_jump,
    };

    out.csv("fig6", &["seed", "n", "x", "y"], |w| {
        for (s, o) in orbits.iter().enumerate() {
            for (k, p) in o.points.iter().enumerate() {
                w.write_record([s.to_string(), k.to_string(), num(p.x), num(p.y)])?;
            }
        }
        Ok(())
    })?;
    out.csv("fig6_saddle", &["n", "x", "y"], |w| {
        for (k, p) in pseudo.points.iter().enumerate() {
            w.write_record([k.to_string(), num(p.x), num(p.y)])?;
        }
        Ok(())
    })?;
    out.csv("fig6_hist", &["ix", "iy", "x", "y", "count"], |w| {
        for (i, &c) in hist.counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let centre = hist.cell_center(i);
            w.write_record([
                (i % bins).to_string(),
                (i / bins).to_string(),
                num(centre.x),
                num(centre.y),
                c.to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.json("fig6", &report)?;

    let plain: Vec<Point> = orbits.iter().flat_map(|o| o.points.iter().copied()).collect();
    let mut plot = Plot::new("chaotic iterates, lambda = 0.99, mu = 5")
        .with(Layer::dots("pseudo-orbit", &pseudo.points, GREY))
        .with(Layer::dots("orbits", &plain, RED));
    for p in ACCUMULATION_POINTS {
        plot = plot.with(Layer::marker("accumulation point", p, GREEN));
    }
    out.svg("fig6", &plot)?;

    if all_escaped {
        Err(Failure::Inconclusive(
            "every plain orbit escaped; see fig6_saddle for the pseudo-orbit".into(),
        ))
    } else {
        Ok(())
    }
}
