mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use starheat::{distance, gauss, kernel, kernel_mass, GraphPoint, QuadratureSpec, StarGraph};

fn weights(n: usize) -> impl Strategy<Value = StarGraph> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let rest: f64 = w[..w.len() - 1].iter().sum();
        *w.last_mut().unwrap() = 1.0 - rest;
        StarGraph::new(w).unwrap()
    })
}

fn graph() -> impl Strategy<Value = StarGraph> {
    (2usize..=5).prop_flat_map(weights)
}

fn point(n: usize) -> impl Strategy<Value = GraphPoint> {
    (0..n, 0.0f64..8.0).prop_map(|(edge, coord)| GraphPoint { edge, coord })
}

fn setup() -> impl Strategy<Value = (StarGraph, GraphPoint, GraphPoint, f64)> {
    graph().prop_flat_map(|g| {
        let n = g.edge_count();
        (Just(g), point(n), point(n), 0.05f64..10.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_is_positive((g, x, y, t) in setup()) {
        let k = kernel(&g, &x, &y, t).unwrap();
        prop_assert!(k.value >= 0.0);
        // Strictly positive wherever the Gaussians do not underflow.
        if distance(&x, &y).powi(2) / (4.0 * t) < 600.0 {
            prop_assert!(k.value > 0.0);
        }
    }

    #[test]
    fn heat_equation_in_both_variables((g, x, y, t) in setup()) {
        let k = kernel(&g, &x, &y, t).unwrap();
        prop_assert!((k.d_t - k.d_xx).abs() <= 1e-10 * k.d_xx.abs().max(k.value).max(1e-300));
    }

    #[test]
    fn weighted_symmetry((g, x, y, t) in setup()) {
        // alpha_{e(x)} Gamma(x, y) = alpha_{e(y)} Gamma(y, x): the kernel is
        // symmetric for the alpha-weighted measure.
        let a = g.alpha(x.edge) * kernel(&g, &x, &y, t).unwrap().value;
        let b = g.alpha(y.edge) * kernel(&g, &y, &x, t).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(b.abs()).max(1e-300));
    }

    #[test]
    fn vertex_continuity_and_flux((g, _x, y, t) in setup()) {
        let vals: Vec<_> = (0..g.edge_count())
            .map(|j| kernel(&g, &GraphPoint { edge: j, coord: 0.0 }, &y, t).unwrap())
            .collect();
        for v in &vals {
            prop_assert!((v.value - vals[0].value).abs() <= 1e-14 * vals[0].value.max(1e-300));
        }
        let flux: f64 = vals.iter().enumerate().map(|(j, v)| g.alpha(j) * v.d_x).sum();
        let scale: f64 = vals.iter().map(|v| v.d_x.abs()).fold(vals[0].value, f64::max);
        prop_assert!(flux.abs() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn unit_mass((g, x, _y, t) in setup()) {
        let m = kernel_mass(&g, &x, t, &QuadratureSpec::default()).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-10, "{m}");
    }

    #[test]
    fn derivatives_match_finite_differences((g, x, y, t) in setup()) {
        // Central differences away from the vertex, where the kernel is smooth in x.
        prop_assume!(x.coord > 0.05 && t > 0.2);
        let h = 1e-4;
        let at = |c: f64, s: f64| kernel(&g, &GraphPoint { edge: x.edge, coord: c }, &y, s).unwrap().value;
        let k = kernel(&g, &x, &y, t).unwrap();
        // Far in the Gaussian tail the difference quotients lose accuracy.
        prop_assume!(k.value > 1e-6);
        let scale = k.value;
        let dx = (at(x.coord + h, t) - at(x.coord - h, t)) / (2.0 * h);
        let dxx = (at(x.coord + h, t) - 2.0 * k.value + at(x.coord - h, t)) / (h * h);
        let dt = (at(x.coord, t + h) - at(x.coord, t - h)) / (2.0 * h);
        prop_assert!((dx - k.d_x).abs() <= 1e-6 * scale.max(k.d_x.abs()) / t, "{dx} {}", k.d_x);
        prop_assert!((dxx - k.d_xx).abs() <= 1e-4 * scale.max(k.d_xx.abs()) / t, "{dxx} {}", k.d_xx);
        prop_assert!((dt - k.d_t).abs() <= 1e-6 * scale.max(k.d_t.abs()) / t, "{dt} {}", k.d_t);
    }

    #[test]
    fn distance_is_a_metric((g, x, y, _t) in setup(), z in point(5)) {
        let z = GraphPoint { edge: z.edge % g.edge_count(), coord: z.coord };
        prop_assert!(distance(&x, &y) >= 0.0);
        prop_assert_eq!(distance(&x, &y), distance(&y, &x));
        prop_assert!(distance(&x, &x) == 0.0);
        prop_assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z) + 1e-12);
    }
}

#[test]
fn line_case_is_the_gaussian() {
    let g = StarGraph::uniform(2).unwrap();
    for &(xe, xc, ye, yc, t) in &[(0, 0.3, 0, 1.7, 0.4), (0, 2.0, 1, 0.5, 3.0), (1, 0.0, 0, 4.0, 0.1)] {
        let x = GraphPoint { edge: xe, coord: xc };
        let y = GraphPoint { edge: ye, coord: yc };
        let signed = |p: &GraphPoint| if p.edge == 0 { p.coord } else { -p.coord };
        let want = gauss(signed(&x) - signed(&y), t).unwrap().value;
        assert_relative_eq!(kernel(&g, &x, &y, t).unwrap().value, want, max_relative = 1e-15);
    }
}

#[test]
fn invalid_time_is_rejected() {
    let g = StarGraph::uniform(3).unwrap();
    let o = GraphPoint::vertex();
    assert!(kernel(&g, &o, &o, 0.0).is_err());
    assert!(kernel(&g, &o, &o, -1.0).is_err());
    assert!(kernel(&g, &o, &GraphPoint { edge: 3, coord: 1.0 }, 1.0).is_err());
}
