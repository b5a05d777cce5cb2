use crate::data::GraphFunction;
use crate::error::{ensure_time, Error, Result};
use crate::graph::{distance, GraphPoint, StarGraph};
use crate::kernel::{gauss_value, tail_radius};
use crate::quadrature::QuadratureSpec;
use crate::semigroup::{apply_value, density_hull, density_integral};

use super::MARGIN_TOL;

/// Default number of grid points in `r` used to maximize the Harnack constant.
pub const DEFAULT_R_GRID: usize = 101;
const GOLDEN_ITERATIONS: usize = 30;

fn check_times(t: f64, s: f64) -> Result<()> {
    ensure_time(s)?;
    ensure_time(t)?;
    if s >= t {
        return Err(Error::Domain(format!("need s < t, got s = {s}, t = {t}")));
    }
    Ok(())
}

/// `rho(x, y, t, s)`: `x + d t/(t-s)` on a common edge, `x - d t/(t-s)` across the vertex.
pub fn rho(x: &GraphPoint, y: &GraphPoint, t: f64, s: f64) -> Result<f64> {
    check_times(t, s)?;
    let d = distance(x, y);
    let shift = d * t / (t - s);
    Ok(if x.shares_edge(y) { x.coord + shift } else { x.coord - shift })
}

/// Position at `r in [0, t-s]` of the path from `x` (at time `t`) to `y`
/// (at time `s`): a straight segment on a common edge, otherwise two legs
/// through the vertex at constant speed `d(x,y)/(t-s)`.
pub fn path_point(x: &GraphPoint, y: &GraphPoint, t: f64, s: f64, r: f64) -> Result<GraphPoint> {
    check_times(t, s)?;
    let span = t - s;
    let r = r.clamp(0.0, span);
    if x.shares_edge(y) {
        let edge = if x.is_vertex() { y.edge } else { x.edge };
        let c = x.coord + r * (y.coord - x.coord) / span;
        return Ok(GraphPoint { edge, coord: c.max(0.0) });
    }
    let speed = (x.coord + y.coord) / span;
    let travelled = speed * r;
    Ok(if travelled <= x.coord {
        GraphPoint { edge: x.edge, coord: (x.coord - travelled).max(0.0) }
    } else {
        GraphPoint { edge: y.edge, coord: (travelled - x.coord).max(0.0) }
    })
}

/// `int_0^inf g(z - w, tau) phi_i(w) dw` with atoms evaluated exactly.
fn reflected_mass(data: &GraphFunction, edge: usize, z: f64, tau: f64, q: &QuadratureSpec) -> Result<f64> {
    let mut v: f64 = data.atoms_on(edge).map(|a| a.weight * gauss_value(z - a.loc, tau)).sum();
    let Some((lo, hi)) = density_hull(data, edge, q.tail_eps) else { return Ok(v) };
    let r = tail_radius(tau, q.tail_eps)?.hypot((lo - z).max(z - hi).max(0.0));
    let window = [(z - r).max(0.0), z, z + r];
    let window: Vec<f64> = if window[1] > window[0] { window.to_vec() } else { vec![window[0], window[2]] };
    v += density_integral(data, edge, &window, q, |w| [gauss_value(z - w, tau)])?.value[0];
    Ok(v)
}

/// Maximizer of the Harnack constant along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackConstant {
    pub value: f64,
    /// Path parameter `r` where the maximum was found.
    pub r: f64,
    /// Edge `i` attaining the maximum.
    pub edge: usize,
}

fn path_objective(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    y: &GraphPoint,
    t: f64,
    s: f64,
    r: f64,
    q: &QuadratureSpec,
) -> Result<(f64, usize)> {
    let p = path_point(x, y, t, s, r)?;
    let tau = t - r;
    let u = apply_value(graph, data, &p, tau, q)?;
    if !(u > 0.0) {
        return Err(Error::Domain(format!(
            "P_tau phi vanishes at edge {}, coord {} (tau = {tau}); cannot form the Harnack constant",
            p.edge + 1,
            p.coord
        )));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..graph.edge_count() {
        let c = reflected_mass(data, i, p.coord, tau, q)? / (2.0 * graph.alpha(i) * u);
        if c > best.0 {
            best = (c, i);
        }
    }
    Ok(best)
}

/// Numerically maximizes
/// `int g(gamma(r) - z, t-r) phi_i(z) dz / (2 alpha_i P_{t-r} phi(gamma(r)))`
/// over edges `i` and `r in [0, t-s]`: a uniform grid of `r_grid_size`
/// points, then golden-section refinement within one cell of the first
/// maximal grid point.
pub fn harnack_constant_detail(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    y: &GraphPoint,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
    r_grid_size: usize,
) -> Result<HarnackConstant> {
    check_times(t, s)?;
    graph.check_point(x)?;
    graph.check_point(y)?;
    if data.is_zero() {
        return Err(Error::Domain("Harnack constant needs nonzero initial data".into()));
    }
    let n = r_grid_size.max(2);
    let span = t - s;
    let step = span / (n - 1) as f64;
    let mut best = HarnackConstant { value: f64::NEG_INFINITY, r: 0.0, edge: 0 };
    let mut best_k = 0;
    for k in 0..n {
        let r = k as f64 * step;
        let (v, i) = path_objective(graph, data, x, y, t, s, r, q)?;
        if v > best.value {
            best = HarnackConstant { value: v, r, edge: i };
            best_k = k;
        }
    }
    let mut lo = best_k.saturating_sub(1) as f64 * step;
    let mut hi = ((best_k + 1).min(n - 1) as f64 * step).min(span);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = path_objective(graph, data, x, y, t, s, c, q)?;
    let mut fd = path_objective(graph, data, x, y, t, s, d, q)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if fc.0 >= fd.0 {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = path_objective(graph, data, x, y, t, s, c, q)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = path_objective(graph, data, x, y, t, s, d, q)?;
        }
    }
    for (r, (v, i)) in [(c, fc), (d, fd)] {
        if v > best.value {
            best = HarnackConstant { value: v, r, edge: i };
        }
    }
    Ok(best)
}

/// The numeric Harnack constant `C` (see [`harnack_constant_detail`]).
pub fn harnack_constant(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    y: &GraphPoint,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
    r_grid_size: usize,
) -> Result<f64> {
    harnack_constant_detail(graph, data, x, y, t, s, q, r_grid_size).map(|c| c.value)
}

/// Time-independent upper bound on the Harnack constant for points in
/// `B_R` and times above `eps`, assembled from
/// `numerator <= (4 pi tau)^{-1/2} |phi_i|_1` and
/// `P_tau phi >= 2 alpha_j (4 pi tau)^{-1/2} eta lambda exp(-(R0+R)^2 / 4 eps)`:
///
/// `max_i |phi_i|_1 / (2 alpha_i) * exp((R0+R)^2 / (4 eps)) / (2 alpha_j eta lambda)`.
pub fn harnack_constant_bound(graph: &StarGraph, data: &GraphFunction, radius: f64, eps: f64) -> Result<f64> {
    if !(radius > 0.0 && eps > 0.0) {
        return Err(Error::Domain(format!("radius and time floor must be positive, got {radius}, {eps}")));
    }
    data.check_against(graph)?;
    let w = data.positivity_witness()?;
    let numer = (0..graph.edge_count())
        .map(|i| data.l1_norm(i) / (2.0 * graph.alpha(i)))
        .fold(0.0, f64::max);
    let growth = ((w.r0 + radius).powi(2) / (4.0 * eps)).exp();
    Ok(numer * growth / (2.0 * graph.alpha(w.edge) * w.eta * w.lambda))
}

/// One evaluation of the Harnack inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackReport {
    pub x: GraphPoint,
    pub y: GraphPoint,
    pub t: f64,
    pub s: f64,
    /// `u(x, t) / u(y, s)`
    pub ratio: f64,
    pub rho: f64,
    pub c: f64,
    pub rhs: f64,
    /// `ratio - rhs`
    pub margin: f64,
}

/// Right-hand side of the Harnack inequality for a given constant `c`.
pub fn harnack_rhs(x: &GraphPoint, y: &GraphPoint, t: f64, s: f64, c: f64) -> Result<f64> {
    let rho = rho(x, y, t, s)?;
    let d = distance(x, y);
    let span = t - s;
    let expo = -(0.25 + c) * d * d / span - c * span / (s * t) * rho * rho - 2.0 * c * d / span * rho * (s / t).ln();
    Ok((s / t).sqrt() * expo.exp())
}

fn harnack_once(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    y: &GraphPoint,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
    r_grid_size: usize,
) -> Result<HarnackReport> {
    let c = harnack_constant(graph, data, x, y, t, s, q, r_grid_size)?;
    let ux = apply_value(graph, data, x, t, q)?;
    let uy = apply_value(graph, data, y, s, q)?;
    if !(uy > 0.0) {
        return Err(Error::Domain(format!("u(y, s) = {uy} is not positive")));
    }
    let ratio = ux / uy;
    let rhs = harnack_rhs(x, y, t, s, c)?;
    Ok(HarnackReport { x: *x, y: *y, t, s, ratio, rho: rho(x, y, t, s)?, c, rhs, margin: ratio - rhs })
}

/// Evaluates `u(x,t)/u(y,s)` against
/// `(s/t)^{1/2} exp(-(1/4 + C) d^2/(t-s) - C (t-s)/(st) rho^2 - 2C d/(t-s) rho ln(s/t))`
/// with the numeric constant `C`. A margin below `-1e-8` triggers one re-run
/// at `rel_tol / 100`.
pub fn harnack_report(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    y: &GraphPoint,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
    r_grid_size: usize,
) -> Result<HarnackReport> {
    let rep = harnack_once(graph, data, x, y, t, s, q, r_grid_size)?;
    if rep.margin < -MARGIN_TOL {
        return harnack_once(graph, data, x, y, t, s, &q.with_rel_tol(q.rel_tol / 100.0), r_grid_size);
    }
    Ok(rep)
}
