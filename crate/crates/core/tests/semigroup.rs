mod common;

use starheat::oracles::{example1_lhs, example1_u, example2_lhs, example2_u};
use starheat::quadrature::integrate_scalar;
use starheat::semigroup::{apply_value, compose_check, harmonic_invariance};
use starheat::{apply, make_harmonic, GraphFunction, GraphPoint, Profile, QuadratureSpec, StarGraph};

fn example1() -> (StarGraph, GraphFunction) {
    let g = StarGraph::uniform(3).unwrap();
    let f = GraphFunction::from_atoms(&[(0, 1.0, 1.0), (1, 1.0, 1.0), (2, 1.0, 1.0)]).unwrap();
    (g, f)
}

fn example2() -> (StarGraph, GraphFunction) {
    (StarGraph::uniform(3).unwrap(), GraphFunction::from_atoms(&[(2, 1.0, 1.0)]).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn example_closed_forms() {
    let q = QuadratureSpec::default();
    let (g1, f1) = example1();
    let (g2, f2) = example2();
    for ix in 0..25 {
        let x = 0.2 * ix as f64;
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            for e in 0..3 {
                let p = GraphPoint { edge: e, coord: x };
                let v = apply(&g1, &f1, &p, t, &q).unwrap();
                assert!(close(v.u, example1_u(x, t).unwrap(), 1e-12));
                assert!(close(v.log_xx().unwrap(), example1_lhs(x, t).unwrap(), 1e-12));
                let v = apply(&g2, &f2, &p, t, &q).unwrap();
                assert!(close(v.u, example2_u(e, x, t).unwrap(), 1e-12));
                assert!(close(v.log_xx().unwrap(), example2_lhs(e, x, t).unwrap(), 1e-12));
            }
        }
    }
}

fn mixed_data() -> (StarGraph, GraphFunction) {
    let g = StarGraph::new(vec![0.15, 0.25, 0.6]).unwrap();
    let f = GraphFunction::empty()
        .with_atom(0, 0.8, 0.7)
        .unwrap()
        .with_density(1, Profile::Gauss { center: 1.5, sigma: 0.4, height: 1.0 })
        .unwrap()
        .with_density(2, Profile::Indicator { a: 0.5, b: 2.0, height: 0.5 })
        .unwrap()
        .with_density(2, Profile::Exp { rate: 1.5, height: 0.3 })
        .unwrap();
    (g, f)
}

#[test]
fn vertex_continuity_and_kirchhoff() {
    let (g, f) = mixed_data();
    let q = QuadratureSpec::default();
    for &t in &[0.05, 0.4, 2.0, 9.0] {
        let vals: Vec<_> = (0..3).map(|j| apply(&g, &f, &GraphPoint { edge: j, coord: 0.0 }, t, &q).unwrap()).collect();
        for v in &vals {
            assert!((v.u - vals[0].u).abs() <= 1e-12 * vals[0].u);
        }
        let flux: f64 = vals.iter().enumerate().map(|(j, v)| g.alpha(j) * v.u_x).sum();
        let scale = vals.iter().map(|v| v.u_x.abs()).fold(vals[0].u, f64::max);
        assert!(flux.abs() <= 1e-9 * scale, "t={t} flux={flux}");
    }
}

#[test]
fn heat_equation_residual() {
    let (g, f) = mixed_data();
    let q = QuadratureSpec::default();
    for e in 0..3 {
        for &x in &[0.0, 0.3, 1.1, 2.5, 4.0] {
            for &t in &[0.2, 1.0, 5.0] {
                let v = apply(&g, &f, &GraphPoint { edge: e, coord: x }, t, &q).unwrap();
                let scale = v.u_xx.abs().max(v.u);
                assert!((v.u_t - v.u_xx).abs() <= 1e-8 * scale, "{e} {x} {t}: {} {}", v.u_t, v.u_xx);
                // Difference quotients in time as an independent check.
                let dt = 1e-4;
                let up = apply_value(&g, &f, &GraphPoint { edge: e, coord: x }, t + dt, &q).unwrap();
                let dn = apply_value(&g, &f, &GraphPoint { edge: e, coord: x }, t - dt, &q).unwrap();
                assert!(((up - dn) / (2.0 * dt) - v.u_t).abs() <= 1e-5 * scale.max(1e-3));
            }
        }
    }
}

#[test]
fn weighted_mass_is_conserved() {
    let (g, f) = mixed_data();
    let q = QuadratureSpec::default().with_rel_tol(1e-9);
    let want: f64 = (0..3).map(|j| g.alpha(j) * f.l1_norm(j)).sum();
    for &t in &[0.3, 2.0] {
        let mut got = 0.0;
        for j in 0..3 {
            let edge_mass = integrate_scalar(
                |y| apply_value(&g, &f, &GraphPoint { edge: j, coord: y }, t, &q).unwrap(),
                &[0.0, 1.0, 3.0, 8.0, 40.0],
                &q,
            )
            .unwrap();
            got += g.alpha(j) * edge_mass;
        }
        assert!((got - want).abs() <= 1e-8 * want, "t={t}: {got} vs {want}");
    }
}

#[test]
fn plain_mass_is_not_conserved_for_unequal_weights() {
    let g = StarGraph::new(vec![0.1, 0.9]).unwrap();
    let f = GraphFunction::from_atoms(&[(0, 0.0, 1.0)]).unwrap();
    let q = QuadratureSpec::default();
    let plain: f64 = (0..2)
        .map(|j| {
            integrate_scalar(
                |y| apply_value(&g, &f, &GraphPoint { edge: j, coord: y }, 1.0, &q).unwrap(),
                &[0.0, 2.0, 20.0],
                &q,
            )
            .unwrap()
        })
        .sum();
    // An atom placed at the vertex from edge 0 gives 2 alpha_0 g(x) on every
    // edge, so the plain integral is N alpha_0 = 0.2 rather than 1.
    assert!((plain - 0.2).abs() < 1e-8, "{plain}");
}

#[test]
fn compose_example1() {
    let (g, f) = example1();
    let q = QuadratureSpec::default();
    let rep = compose_check(&g, &f, &GraphPoint { edge: 0, coord: 1.0 }, 0.3, 0.7, &q).unwrap();
    assert!(rep.discrepancy <= rep.tolerance(&q), "{rep:?}");
    assert!(rep.discrepancy <= 1e-6, "{rep:?}");
}

#[test]
fn compose_symmetric_line_vertex_atom() {
    let g = StarGraph::uniform(2).unwrap();
    let f = GraphFunction::from_atoms(&[(0, 0.0, 1.0)]).unwrap();
    let q = QuadratureSpec::default();
    for &x in &[0.0, 0.4, 1.5] {
        let rep = compose_check(&g, &f, &GraphPoint { edge: 1, coord: x }, 0.5, 0.5, &q).unwrap();
        assert!(rep.discrepancy <= 1e-8, "{rep:?}");
    }
}

#[test]
fn compose_small_first_time_is_interpolation_limited() {
    let (g, f) = mixed_data();
    let q = QuadratureSpec::default();
    let rep = compose_check(&g, &f, &GraphPoint { edge: 2, coord: 0.7 }, 1e-4, 0.8, &q).unwrap();
    assert!(rep.discrepancy <= rep.tolerance(&q) + 1e-9, "{rep:?}");
}

#[test]
fn harmonic_functions_are_invariant() {
    let g = StarGraph::new(vec![0.2, 0.3, 0.5]).unwrap();
    // 0.2 * 1 + 0.3 * 2 + 0.5 * a = 0
    let w = make_harmonic(&g, &[1.0, 2.0, -1.6], 0.7).unwrap();
    assert!(!w.is_bounded());
    let q = QuadratureSpec::default();
    for e in 0..3 {
        for &x in &[0.0, 0.5, 3.0] {
            for &t in &[0.1, 1.0, 4.0] {
                let chk = harmonic_invariance(&g, &w, &GraphPoint { edge: e, coord: x }, t, &q).unwrap();
                assert!(chk.discrepancy <= 1e-8, "{chk:?}");
            }
        }
    }
    assert!(make_harmonic(&g, &[1.0, 1.0, 1.0], 0.0).is_err());
    assert!(make_harmonic(&g, &[0.0; 3], 2.0).unwrap().is_bounded());
}

#[test]
fn data_on_wrong_graph_is_rejected() {
    let g = StarGraph::uniform(2).unwrap();
    let f = GraphFunction::from_atoms(&[(2, 1.0, 1.0)]).unwrap();
    assert!(apply(&g, &f, &GraphPoint::vertex(), 1.0, &QuadratureSpec::default()).is_err());
}
