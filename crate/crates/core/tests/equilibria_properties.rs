use flipflop_core::equilibria::{
    classify, fixed_points, hopf_coefficients, interior_fixed_point, manifolds_at_unit_fixed_point,
    mu_h, trace_det_closed_form, Family, ManifoldKind, Stability,
};
use flipflop_core::map::{iterate, jacobian, step};
use flipflop_core::{Params, Point};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// `b` straight from the Jacobian at the interior fixed point.
fn det_at_interior(lambda: f64, mu: f64) -> f64 {
    let p = Params::new(lambda, mu).unwrap();
    let c = interior_fixed_point(&p).unwrap();
    let (j11, j12, j21, j22) = (
        lambda * (2.0 * c.x - 1.0) - c.y,
        -c.x,
        mu * c.y,
        mu * (c.x - 2.0 * c.y),
    );
    j11 * j22 - j12 * j21
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_trace_and_det(l in 0.01f64..0.999, mu in 1.01f64..10.0) {
        let p = Params::new(l, mu).unwrap();
        let (a, b, c) = trace_det_closed_form(&p).unwrap();
        let j11 = l * (2.0 * c.x - 1.0) - c.y;
        let j22 = mu * (c.x - 2.0 * c.y);
        let j12 = -c.x;
        let j21 = mu * c.y;
        prop_assert!(rel(a, j11 + j22) < 1e-10 || (a - (j11 + j22)).abs() < 1e-12, "{a} vs {}", j11 + j22);
        prop_assert!(rel(b, j11 * j22 - j12 * j21) < 1e-10, "{b}");
        if 4.0 * b > a * a {
            let h = hopf_coefficients(&p).unwrap();
            prop_assert!(rel(h.sigma.norm_sqr(), b) < 1e-12);
            prop_assert!(h.sigma.im > 0.0);
        }
    }

    #[test]
    fn fixed_points_are_fixed(l in 0.05f64..3.0, mu in 0.2f64..10.0) {
        let p = Params::new(l, mu).unwrap();
        let fps = fixed_points(&p);
        prop_assert!(fps.len() >= 2);
        prop_assert_eq!(fps[0].location, Point::new(1.0, 0.0));
        prop_assert_eq!(fps[1].location, Point::new(1.0 / l, 0.0));
        for f in &fps {
            let q = f.location;
            let r = step(&p, q).dist(q);
            prop_assert!(r < 1e-10 * q.norm().powi(2).max(1.0), "{f:?} residual {r}");
            if matches!(f.family, Family::Interior | Family::Exterior) {
                prop_assert!((q.y - (q.x - 1.0 / mu)).abs() <= 1e-14 * q.x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn classification_matches_moduli(l in 0.05f64..0.999, mu in 1.05f64..10.0) {
        let p = Params::new(l, mu).unwrap();
        for f in fixed_points(&p) {
            let (m0, m1) = (f.eigenvalues[0].norm(), f.eigenvalues[1].norm());
            let complex = f.eigenvalues[0].im != 0.0;
            let expect = match (complex, m0 > 1.0, m1 > 1.0) {
                _ if (m0 - 1.0).abs() < 1e-9 || (m1 - 1.0).abs() < 1e-9 => continue,
                (true, true, _) => Stability::SpiralSource,
                (true, false, _) => Stability::SpiralSink,
                (false, true, true) => Stability::Source,
                (false, false, false) => Stability::Sink,
                _ => Stability::Saddle,
            };
            prop_assert_eq!(f.stability, expect, "{:?}", f);
        }
    }
}

#[test]
fn golden_interior_point() {
    let p = Params::new(0.99, 4.5).unwrap();
    let c = interior_fixed_point(&p).unwrap();
    assert!((c.x - 0.5639).abs() < 5e-4 && (c.y - 0.3417).abs() < 5e-4, "{c:?}");
    let f = classify(&p, c).unwrap();
    assert_eq!(f.stability, Stability::SpiralSink);
    assert_eq!(f.family, Family::Interior);
    let s = f.eigenvalues[0];
    assert!((s.re + 0.3763).abs() < 1e-3 && (s.im.abs() - 0.9171).abs() < 1e-3, "{s}");
    let b = hopf_coefficients(&p).unwrap().b;
    assert!((b - 0.9827).abs() < 1e-3);
    // oracle: moduli of the quoted eigenvalues
    assert!((b - (0.3763f64.powi(2) + 0.9171f64.powi(2))).abs() < 1e-3);
}

#[test]
fn axis_spectra() {
    let p = Params::new(0.99, 4.5).unwrap();
    let f = classify(&p, Point::new(1.0, 0.0)).unwrap();
    assert_eq!(f.eigenvalues[0].re, 0.99);
    assert_eq!(f.eigenvalues[1].re, 4.5);
    assert_eq!(f.stability, Stability::Saddle);
    let g = classify(&p, Point::new(1.0 / 0.99, 0.0)).unwrap();
    assert!((g.eigenvalues[0].re - 1.01).abs() < 1e-15);
    assert!((g.eigenvalues[1].re - 4.5 / 0.99).abs() < 1e-14);
    assert_eq!(g.stability, Stability::Source);
    assert!(classify(&p, Point::new(0.3, 0.3)).is_err());
}

#[test]
fn threshold_values() {
    let mh = mu_h(0.99, 1e-12).unwrap();
    assert!((mh - 4.5438).abs() < 5e-4, "{mh}");
    let at = |mu: f64| hopf_coefficients(&Params::new(0.99, mu).unwrap()).unwrap();
    let h = at(mh);
    assert!((h.b - 1.0).abs() < 1e-9);
    assert!((h.sigma.norm() - 1.0).abs() < 1e-6);
    assert!((h.interior.x - 0.5632).abs() < 5e-4 && (h.interior.y - 0.3431).abs() < 5e-4);
    assert!(at(mh - 0.1).b < 1.0 && at(mh + 0.1).b > 1.0);
    let s = h.specialized.unwrap();
    assert!(rel(s.a, h.a) < 1e-10 && rel(s.b, h.b) < 1e-10);
    assert!(mu_h(1.0, 1e-12).is_err());
    assert!(mu_h(0.5, 0.0).is_err());
}

#[test]
fn b_dips_then_increases_with_mu() {
    // b starts at λ when μ = 1, falls to a minimum below 1 and then rises
    // strictly, so b = 1 still has a single root
    for &l in &[0.1, 0.5, 0.9, 0.99] {
        let bs: Vec<f64> = (1..=10_000)
            .map(|k| det_at_interior(l, 1.0 + 19.0 * k as f64 / 10_000.0))
            .collect();
        let lo = (0..bs.len()).min_by(|&i, &j| bs[i].total_cmp(&bs[j])).unwrap();
        assert!(lo > 0, "λ = {l}: no initial dip");
        assert!(bs[lo] < l);
        assert!(bs[..=lo].windows(2).all(|w| w[1] < w[0]));
        assert!(bs[lo..].windows(2).all(|w| w[1] > w[0]));
        assert!(1.0 + 19.0 * (lo + 1) as f64 / 10_000.0 < 2.2);
    }
}

#[test]
fn stability_flips_across_threshold() {
    for &l in &[0.5, 0.9, 0.99] {
        let mh = mu_h(l, 1e-12).unwrap();
        let class = |mu: f64| {
            let p = Params::new(l, mu).unwrap();
            classify(&p, interior_fixed_point(&p).unwrap()).unwrap().stability
        };
        assert_eq!(class(mh * (1.0 - 1e-3)), Stability::SpiralSink);
        assert_eq!(class(mh * (1.0 + 1e-3)), Stability::SpiralSource);
    }
}

#[test]
fn unit_fixed_point_manifolds() {
    let p = Params::new(0.99, 5.0).unwrap();
    let (s, u) = manifolds_at_unit_fixed_point(&p).unwrap();
    assert_eq!(s.kind, ManifoldKind::StableSegment { x_upper: 1.0 / 0.99 });
    let ManifoldKind::LinearUnstableLine { slope } = u.kind else {
        panic!("{u:?}")
    };
    assert!((slope + 4.01).abs() < 1e-12);
    let v = jacobian(&p, Point::new(1.0, 0.0)).apply(Point::new(1.0, slope));
    assert!((v.x - 5.0).abs() < 1e-12 && (v.y - 5.0 * slope).abs() < 1e-12);
    assert!(manifolds_at_unit_fixed_point(&Params::new(1.2, 5.0).unwrap()).is_err());

    let q = Params::new(0.99, 4.5).unwrap();
    let end = iterate(&q, Point::new(0.5, 0.0), 10_000).unwrap();
    assert!(end.dist(Point::new(1.0, 0.0)) < 1e-8, "{end:?}");
}
