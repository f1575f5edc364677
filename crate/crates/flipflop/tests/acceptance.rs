//! Acceptance checks, one line each. Tolerances and time budgets are fixed
//! below; the process exits non-zero if any check fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use flipflop_core::chaos::{
    horseshoe_witness, lyapunov, lyapunov_along, saddle_orbit, splatter_stats, StaggerConfig,
};
use flipflop_core::curve::{attracting_set, detect_cycle, picard_solve, PicardOptions};
use flipflop_core::equilibria::{classify, hopf_coefficients, interior_fixed_point, mu_h, Stability};
use flipflop_core::geometry::hausdorff;
use flipflop_core::map::{jacobian, preimages, step};
use flipflop_core::{Params, Point};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const MU_H_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion(id: &str, name: &str, budget: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = check();
    let t = start.elapsed();
    let in_time = t <= budget;
    let pass = o.pass && in_time;
    println!(
        "[{}] {id} {name}: {}; {:.2} s of {} s{}",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        t.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { " (over budget)" }
    );
    pass
}

fn p(l: f64, m: f64) -> Params {
    Params::new(l, m).unwrap()
}

fn c1() -> Outcome {
    const TOL_POINT: f64 = 5e-4;
    const TOL_EIG: f64 = 1e-3;
    let params = p(0.99, 4.5);
    let c = interior_fixed_point(&params).unwrap();
    let f = classify(&params, c).unwrap();
    let e = if f.eigenvalues[0].im >= 0.0 {
        f.eigenvalues[0]
    } else {
        f.eigenvalues[1]
    };
    let conj = f.eigenvalues[0].im == -f.eigenvalues[1].im;
    let pass = (c.x - 0.5639).abs() < TOL_POINT
        && (c.y - 0.3417).abs() < TOL_POINT
        && (e.re + 0.3763).abs() < TOL_EIG
        && (e.im - 0.9171).abs() < TOL_EIG
        && conj;
    outcome(
        pass,
        format!("p* = ({:.6}, {:.6}), eigenvalues {:.6} ± {:.6}i", c.x, c.y, e.re, e.im),
    )
}

fn c2() -> Outcome {
    let mh = mu_h(0.99, MU_H_TOL).unwrap();
    let h = hopf_coefficients(&p(0.99, mh)).unwrap();
    let m = h.sigma.norm();
    let pass = (mh - 4.5438).abs() < 5e-4
        && (h.interior.x - 0.5632).abs() < 5e-4
        && (h.interior.y - 0.3431).abs() < 5e-4
        && (m - 1.0).abs() < 1e-6;
    outcome(
        pass,
        format!(
            "mu_h = {mh:.7}, p* = ({:.6}, {:.6}), |sigma| - 1 = {:.1e}",
            h.interior.x,
            h.interior.y,
            m - 1.0
        ),
    )
}

fn c3() -> Outcome {
    let mh = mu_h(0.99, MU_H_TOL).unwrap();
    let class = |mu: f64| {
        let params = p(0.99, mu);
        classify(&params, interior_fixed_point(&params).unwrap()).unwrap().stability
    };
    let (below, above) = (class(mh * (1.0 - 1e-3)), class(mh * (1.0 + 1e-3)));
    outcome(
        below == Stability::SpiralSink && above == Stability::SpiralSource,
        format!("{below:?} below, {above:?} above"),
    )
}

fn c4() -> Outcome {
    const TOL: f64 = 1e-12;
    let params = p(0.99, 5.0);
    let a = step(&params, Point::new(1.0, 0.2));
    let b = step(&params, Point::new(0.8, 0.8));
    let keys = a.dist_max(Point::new(0.8, 0.8)) <= TOL && b.dist_max(Point::new(0.2016, 0.0)) <= TOL;
    let w = horseshoe_witness(&params, 1000, 512).unwrap();
    let pass = keys && w.key_points_pass() && w.component_count() >= 2 && !w.inconclusive;
    outcome(
        pass,
        format!(
            "Phi(1,0.2) = ({:.15}, {:.15}), Phi(0.8,0.8) = ({:.15}, {:.15}), {} components {:?} at 512^2",
            a.x,
            a.y,
            b.x,
            b.y,
            w.component_count(),
            w.components
        ),
    )
}

fn c5() -> Outcome {
    let params = p(0.99, 4.5449);
    let c = interior_fixed_point(&params).unwrap();
    let run = picard_solve(&params, c, &PicardOptions::default()).unwrap();
    let cloud = attracting_set(&params, Point::new(0.555, 0.340), 100_000, 20_000).unwrap();
    let d = hausdorff(&run.curve.dense(8), &cloud);
    let res = run.curve.residual();
    let wind = run.curve.winding_number();
    outcome(
        run.converged && res < 1e-3 && wind == 1 && d < 5e-3,
        format!(
            "converged {} in {} sweeps, residual {res:.2e}, winding {wind}, Hausdorff to orbit cloud {d:.2e}",
            run.converged, run.iterations
        ),
    )
}

fn c6() -> Outcome {
    const BAND: (f64, f64) = (1.5, 3.0);
    let mh = mu_h(0.99, MU_H_TOL).unwrap();
    let mut radii = Vec::new();
    let mut converged = true;
    for nu in [1e-4, 2e-4, 4e-4, 8e-4] {
        let params = p(0.99, mh + nu);
        let c = interior_fixed_point(&params).unwrap();
        match picard_solve(&params, c, &PicardOptions::default()) {
            Ok(run) => {
                converged &= run.converged;
                radii.push(run.curve.max_radius());
            }
            Err(e) => return outcome(false, format!("nu = {nu:e}: {e}")),
        }
    }
    let ratios: Vec<f64> = radii.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = converged && ratios.iter().all(|r| (BAND.0..=BAND.1).contains(r));
    outcome(
        pass,
        format!(
            "max radii {:?}, ratios per doubling {:?}, band [{}, {}]",
            radii.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            BAND.0,
            BAND.1
        ),
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn c7() -> Outcome {
    const TOL: f64 = 1e-12;
    const PRE_TOL: f64 = 1e-9;
    let cases = 1000;
    let params = || (0.05f64..4.0, 0.05f64..10.0).prop_map(|(l, m)| p(l, m));
    let unit = || (0.01f64..=2.0, 0.1f64..10.0).prop_map(|(l, m)| p(l, m));
    let point = || (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| Point::new(x, y));
    let mut failures = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    let run = |f: &mut dyn FnMut(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config {
            failure_persistence: None,
            ..Config::with_cases(cases)
        });
        f(&mut runner)
    };

    check(
        "axis",
        run(&mut |r| {
            r.run(&(params(), -3.0f64..3.0), |(pp, x)| {
                let q = step(&pp, Point::new(x, 0.0));
                prop_assert_eq!(q.y, 0.0);
                prop_assert!(close(q.x, 1.0 - pp.lambda() * x * (1.0 - x), TOL));
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    );
    check(
        "diagonal",
        run(&mut |r| {
            r.run(&(unit(), 0.0f64..=1.0), |(pp, x)| {
                let q = step(&pp, Point::new(x, x));
                prop_assert_eq!(q.y, 0.0);
                prop_assert!((0.0..=1.0).contains(&q.x));
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    );
    check(
        "parabola",
        run(&mut |r| {
            r.run(&(params(), -2.0f64..2.0), |(pp, y)| {
                let q = step(&pp, Point::new(1.0, y));
                prop_assert!(close(q.x, 1.0 - y, TOL));
                prop_assert!(close(q.y, pp.mu() * q.x * (1.0 - q.x), TOL));
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    );
    check(
        "determinant",
        run(&mut |r| {
            r.run(&(params(), point()), |(pp, q)| {
                let (l, m) = (pp.lambda(), pp.mu());
                let expanded = m * (l * (2.0 * q.x - 1.0) * (q.x - 2.0 * q.y) + 2.0 * q.y * q.y);
                let j = jacobian(&pp, q);
                prop_assert!(close(j.j11 * j.j22 - j.j12 * j.j21, expanded, TOL));
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    );
    check(
        "preimages",
        run(&mut |r| {
            r.run(&(params(), point()), |(pp, t)| {
                let pre = preimages(&pp, t);
                prop_assert!(pre.points.len() <= 4);
                for q in &pre.points {
                    prop_assert!(step(&pp, *q).dist(t) < PRE_TOL);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    );
    let pass = failures.is_empty();
    outcome(
        pass,
        if pass {
            format!("axis, diagonal, parabola, determinant, preimages at {cases} points each")
        } else {
            failures.join("; ")
        },
    )
}

fn c8() -> Outcome {
    const TOL: f64 = 1e-3;
    let oracle = 0.5 * 0.9827f64.ln();
    let sink = p(0.99, 4.5);
    let c = interior_fixed_point(&sink).unwrap();
    let l = lyapunov(&sink, c + Point::new(1e-3, 1e-3), 100_000, 1000).unwrap();
    let near = l.exponents.iter().all(|e| (e - oracle).abs() < TOL);

    let chaos = p(0.99, 5.0);
    let seed = Point::new(1.0 - 1e-7, 1e-7);
    let plain = match lyapunov(&chaos, seed, 100_000, 0) {
        Ok(r) => format!("plain orbit top exponent {:.4}", r.exponents[0]),
        Err(e) => format!("plain orbit: {e}"),
    };
    let orbit = saddle_orbit(&chaos, seed, 200_000, &StaggerConfig::default()).unwrap();
    let top = lyapunov_along(&chaos, &orbit.points).map_or(f64::NAN, |e| e[0]);
    outcome(
        near && top > 0.0,
        format!(
            "sink exponents {:.6}, {:.6} vs {oracle:.6}; at mu = 5 {plain}, stagger pseudo-orbit top exponent {top:.4}",
            l.exponents[0], l.exponents[1]
        ),
    )
}

const ACCUMULATION: [Point; 4] = [
    Point::new(0.85, 0.0),
    Point::new(0.7, 0.6),
    Point::new(0.4, 0.4),
    Point::new(0.35, 0.0),
];
const CHAOS_SEEDS: [Point; 3] = [
    Point::new(1.0 - 1e-7, 1e-7),
    Point::new(1.0 - 3e-7, 4e-7),
    Point::new(1.0 - 6e-7, 5e-7),
];

fn c9() -> Outcome {
    const RADIUS: f64 = 0.1;
    let h = splatter_stats(&p(0.99, 5.0), &CHAOS_SEEDS, 1_000_000, 100).unwrap();
    let d: Vec<f64> = ACCUMULATION.iter().map(|&q| h.top_decile_distance(q)).collect();
    outcome(
        d.iter().all(|&x| x <= RADIUS),
        format!(
            "{} bounded iterates, {} lost to escape; nearest top-decile cell at {:?} (radius {RADIUS})",
            h.total,
            h.escaped_iterates,
            d.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
        ),
    )
}

const BIN: &str = env!("CARGO_BIN_EXE_flipflop");

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c10() -> Outcome {
    let runs: &[&[&str]] = &[
        &["orbit", "--lambda", "0.99", "--mu", "4.5", "--x0", "0.564", "--y0", "0.342", "-n", "100000"],
        &["fixed-points", "--mu", "4.5", "--format", "json", "--format", "csv"],
        &["hopf", "--lambda", "0.99"],
        &["curve", "--mu", "4.5449", "--format", "csv", "--format", "json", "--format", "svg"],
        &["horseshoe", "--format", "json", "--format", "csv", "--format", "svg"],
        &["lyapunov", "--mu", "4.5"],
        &["lyapunov", "--mu", "5", "--x0", "0.9999999", "--y0", "1e-7", "--stagger", "--transient", "0"],
        &["figure", "fig6", "-n", "1000000"],
    ];
    let base = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let dir = base.path().join(k.to_string());
        let mut full = args.to_vec();
        let d = dir.to_str().unwrap();
        full.extend(["--out-dir", d]);
        let run = || Command::new(BIN).args(&full).stderr(Stdio::null()).status().unwrap();
        let first = run();
        let a = snapshot(&dir);
        let second = run();
        let b = snapshot(&dir);
        files += a.len();
        if a.is_empty() || a != b || first.code() != second.code() {
            mismatched.push(args[0]);
        }
    }
    let same_hist = splatter_stats(&p(0.99, 5.0), &CHAOS_SEEDS, 1_000_000, 100).unwrap()
        == splatter_stats(&p(0.99, 5.0), &CHAOS_SEEDS, 1_000_000, 100).unwrap();
    outcome(
        mismatched.is_empty() && same_hist,
        if mismatched.is_empty() {
            format!("{} runs repeated, {files} files byte-identical; splatter histogram repeats", runs.len())
        } else {
            format!("differing runs: {mismatched:?}")
        },
    )
}

/// Not a criterion: looks for an 11-cycle just above the threshold.
fn eleven_cycle_note() {
    let mh = mu_h(0.99, MU_H_TOL).unwrap();
    let mut periods = Vec::new();
    for k in 1..=20 {
        let params = p(0.99, mh + 0.01 * k as f64 / 20.0);
        let c = interior_fixed_point(&params).unwrap();
        if let Ok(tail) = attracting_set(&params, c + Point::new(1e-3, 0.0), 20_000, 600) {
            if let Some(q) = detect_cycle(&tail, 200, 1e-9) {
                periods.push(q);
            }
        }
    }
    println!(
        "[NOTE] 11-cycle scan over 20 values of mu in (mu_h, mu_h + 0.01]: {}",
        if periods.contains(&11) {
            "period 11 found".to_string()
        } else if periods.is_empty() {
            "no cycle of period <= 200 found".to_string()
        } else {
            format!("periods {periods:?}, none equal to 11")
        }
    );
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        criterion("C1", "fixed point at lambda = 0.99, mu = 4.5", s(1), c1),
        criterion("C2", "Hopf threshold", s(1), c2),
        criterion("C3", "stability flip", s(1), c3),
        criterion("C4", "horseshoe key points and components", s(30), c4),
        criterion("C5", "invariant curve at mu = 4.5449", s(60), c5),
        criterion("C6", "curve size scaling with nu", s(120), c6),
        criterion("C7", "map property suite", s(10), c7),
        criterion("C8", "Lyapunov exponents", s(30), c8),
        criterion("C9", "splatter accumulation points", s(60), c9),
        criterion("C10", "determinism", s(120), c10),
    ];
    eleven_cycle_note();
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
