use crate::data::GraphFunction;
use crate::error::{ensure_time, Result};
use crate::exec::Execution;
use crate::graph::{GraphPoint, StarGraph};
use crate::kernel::{gauss_value, tail_radius};
use crate::quadrature::QuadratureSpec;
use crate::semigroup::{apply, data_window, density_integral};

use super::MARGIN_TOL;

/// `h(x, y, t) = g(x-y) g(x+y) / (g(x-y) + (2 alpha_i - 1) g(x+y))`.
///
/// Evaluated as `g(x+y) / (1 - e^{-xy/t} + 2 alpha_i e^{-xy/t})`, which stays
/// finite when both Gaussians underflow.
pub fn h_factor(graph: &StarGraph, edge: usize, x: f64, y: f64, t: f64) -> Result<f64> {
    ensure_time(t)?;
    Ok(h_unchecked(graph.alpha(edge), x, y, t))
}

#[inline]
fn h_unchecked(alpha: f64, x: f64, y: f64, t: f64) -> f64 {
    let s = x * y / t;
    let decay = (-s).exp();
    gauss_value(x + y, t) / (-(-s).exp_m1() + 2.0 * alpha * decay)
}

/// Edge-local moments entering the correction term and its bounds.
#[derive(Debug, Clone, Copy, Default)]
struct EdgeMoments {
    /// `int min(x, y)^2 h phi_i`
    literal: f64,
    /// `int y^2 h phi_i`
    exact: f64,
    /// `int g(x - y) phi_i`
    reflected: f64,
}

fn edge_moments(graph: &StarGraph, data: &GraphFunction, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<EdgeMoments> {
    let i = x.edge;
    let a = x.coord;
    let alpha = graph.alpha(i);
    let integrand = |y: f64| {
        let h = h_unchecked(alpha, a, y, t);
        let m = a.min(y);
        [m * m * h, y * y * h, gauss_value(a - y, t)]
    };
    let mut acc = [0.0; 3];
    for atom in data.atoms_on(i) {
        let v = integrand(atom.loc);
        for k in 0..3 {
            acc[k] += atom.weight * v[k];
        }
    }
    let r = tail_radius(t, q.tail_eps)?;
    if let Some(window) = data_window(data, x, i, r, q.tail_eps) {
        let res = density_integral(data, i, &window, q, integrand)?;
        for (a, v) in acc.iter_mut().zip(res.value) {
            *a += v;
        }
    }
    Ok(EdgeMoments { literal: acc[0], exact: acc[1], reflected: acc[2] })
}

/// The correction term
/// `I_i(x,t) = 1/(4 t^2 u) int (|x+y| - |x-y|)^2 h(x,y,t) phi_i(y) dy`.
///
/// Only data on the edge of `x` contributes, and the term vanishes at the vertex.
pub fn curvature_term(graph: &StarGraph, data: &GraphFunction, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<f64> {
    let u = apply(graph, data, x, t, q)?.u;
    let m = edge_moments(graph, data, x, t, q)?;
    Ok(m.literal / (t * t * u))
}

/// `1/(t^2 u) int y^2 h(x,y,t) phi_i(y) dy`: the correction obtained when the
/// derivative of `g(x - y)` keeps its sign. It coincides with
/// [`curvature_term`] when all edge data sits at or below `x`, and makes the
/// Cauchy-Schwarz step an identity for a single atom.
pub fn curvature_term_exact(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let u = apply(graph, data, x, t, q)?.u;
    let m = edge_moments(graph, data, x, t, q)?;
    Ok(m.exact / (t * t * u))
}

/// One evaluation of the Li-Yau estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiYauReport {
    pub point: GraphPoint,
    pub t: f64,
    pub alpha: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_t: f64,
    /// `d_xx ln u`
    pub lhs: f64,
    /// Correction term with the `(|x+y| - |x-y|)^2` weight.
    pub i_term: f64,
    /// `-1/(2t) - (1 - 2 alpha_i) i_term`
    pub rhs: f64,
    /// `lhs - rhs`
    pub margin: f64,
    /// `x^2/t^2 * int g(x-y) phi_i / (2 alpha_i u)`
    pub bound_x: f64,
    /// `x^2/t^2 * (4 pi t)^{-1/2} |phi_i|_1 / (2 alpha_i u)`
    pub bound_l1: f64,
    /// Correction term with the signed `(2y)^2` weight.
    pub i_term_exact: f64,
    /// `-1/(2t) - (1 - 2 alpha_i) i_term_exact`
    pub rhs_exact: f64,
    /// `lhs - rhs_exact`, the Cauchy-Schwarz gap; nonnegative.
    pub margin_exact: f64,
}

fn liyau_once(graph: &StarGraph, data: &GraphFunction, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<LiYauReport> {
    let v = apply(graph, data, x, t, q)?;
    let lhs = v.log_xx()?;
    let m = edge_moments(graph, data, x, t, q)?;
    let alpha = graph.alpha(x.edge);
    let u = v.u;
    let i_term = m.literal / (t * t * u);
    let i_term_exact = m.exact / (t * t * u);
    let coef = 1.0 - 2.0 * alpha;
    let x2t2 = x.coord * x.coord / (t * t);
    let bound_x = x2t2 * m.reflected / (2.0 * alpha * u);
    let bound_l1 =
        x2t2 * gauss_value(0.0, t) * data.l1_norm(x.edge) / (2.0 * alpha * u);
    Ok(LiYauReport {
        point: *x,
        t,
        alpha,
        u,
        u_x: v.u_x,
        u_xx: v.u_xx,
        u_t: v.u_t,
        lhs,
        i_term,
        rhs: -1.0 / (2.0 * t) - coef * i_term,
        // lhs - rhs without cancelling the two -1/(2t) terms.
        margin: v.spread() + coef * i_term,
        bound_x,
        bound_l1,
        i_term_exact,
        rhs_exact: -1.0 / (2.0 * t) - coef * i_term_exact,
        margin_exact: v.spread() + coef * i_term_exact,
    })
}

/// Evaluates both sides of the Li-Yau estimate at `(x, t)`.
///
/// If a margin comes out below `-1e-8`, the evaluation is repeated once with
/// `rel_tol / 100` before being returned.
pub fn liyau_report(graph: &StarGraph, data: &GraphFunction, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<LiYauReport> {
    let rep = liyau_once(graph, data, x, t, q)?;
    if rep.margin_exact < -MARGIN_TOL || rep.margin < -MARGIN_TOL {
        let tight = q.with_rel_tol(q.rel_tol / 100.0);
        return liyau_once(graph, data, x, t, &tight);
    }
    Ok(rep)
}

/// [`liyau_report`] over a list of `(point, time)` pairs, in order.
pub fn liyau_scan(
    exec: Execution,
    graph: &StarGraph,
    data: &GraphFunction,
    samples: &[(GraphPoint, f64)],
    q: &QuadratureSpec,
) -> Result<Vec<LiYauReport>> {
    exec.try_map(samples, |(x, t)| liyau_report(graph, data, x, *t, q))
}
