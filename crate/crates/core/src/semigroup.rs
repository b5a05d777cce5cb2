//! The heat semigroup `u(x, t) = P_t phi(x) = int Gamma(x, y, t) phi(y) dy`.
//!
//! Atoms are evaluated exactly. Densities are integrated edge by edge over
//! the window where the kernel exceeds the tail cutoff, split at the
//! Gaussian centers and at the density's own breakpoints. Derivatives are
//! integrals of kernel derivatives.

use crate::data::{GraphFunction, Profile};
use crate::error::{ensure_time, Error, Result};
use crate::exec::Execution;
use crate::graph::{GraphPoint, HarmonicFunction, StarGraph};
use crate::kernel::{gauss_value, kernel_terms, kernel_unchecked, kernel_window, tail_radius};
use crate::quadrature::{integrate, Integral, QuadratureSpec};

/// `u = P_t phi` at one point with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupValue {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_t: f64,
    /// Time at which the value was taken.
    pub t: f64,
    /// `d_xx ln u + 1/(2t)`, the weighted variance of the per-term log-slopes.
    spread: f64,
}

impl SemigroupValue {
    /// Wraps raw derivative values; the log curvature is then formed directly
    /// from them.
    pub fn from_derivatives(t: f64, u: f64, u_x: f64, u_xx: f64, u_t: f64) -> Self {
        let r = u_x / u;
        Self { u, u_x, u_xx, u_t, t, spread: u_xx / u - r * r + 1.0 / (2.0 * t) }
    }

    /// `d_xx ln u + 1/(2t)`.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn log_xx(&self) -> Result<f64> {
        log_second_derivative(self)
    }
}

/// `d_xx ln u = u_xx/u - (u_x/u)^2`.
///
/// Values produced by [`apply`] carry this quantity in centered form
/// (`-1/(2t)` plus a variance), which avoids cancelling two large terms.
pub fn log_second_derivative(v: &SemigroupValue) -> Result<f64> {
    if !(v.u > 0.0) {
        return Err(Error::Domain(format!("log derivative needs u > 0, got {}", v.u)));
    }
    Ok(v.spread - 1.0 / (2.0 * v.t))
}

/// Hull of the supports of the densities on `edge`.
pub(crate) fn density_hull(data: &GraphFunction, edge: usize, eps: f64) -> Option<(f64, f64)> {
    data.densities_on(edge).map(|p| p.support(eps)).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// Integration window on `edge` for `Gamma(x, ., t)` against the densities
/// there. The cutoff radius `r` is taken relative to the largest kernel value
/// over the density support, so data far from `x` still gets a window.
pub(crate) fn data_window(data: &GraphFunction, x: &GraphPoint, edge: usize, r: f64, eps: f64) -> Option<Vec<f64>> {
    let (lo, hi) = density_hull(data, edge, eps)?;
    let d = if edge == x.edge { (lo - x.coord).max(x.coord - hi).max(0.0) } else { x.coord + lo };
    kernel_window(x, edge, d.hypot(r))
}

/// Edge breakpoints for `int_window rho_edge(y) F(y) dy`, or `None` if the
/// window misses the support of every density on the edge.
fn density_breaks(data: &GraphFunction, edge: usize, window: &[f64], eps: f64) -> Option<Vec<f64>> {
    let (wlo, whi) = (window[0], window[window.len() - 1]);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut any = false;
    for p in data.densities_on(edge) {
        let (a, b) = p.support(eps);
        lo = lo.min(a);
        hi = hi.max(b);
        any = true;
    }
    if !any {
        return None;
    }
    let lo = lo.max(wlo);
    let hi = hi.min(whi);
    if !(hi > lo) {
        return None;
    }
    let mut pts = vec![lo, hi];
    pts.extend(window.iter().copied().filter(|w| *w > lo && *w < hi));
    for p in data.densities_on(edge) {
        p.breakpoints(lo, hi, &mut pts);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Some(pts)
}

/// `int_window rho_edge(y) F(y) dy` where `rho_edge` sums the densities on the edge.
pub(crate) fn density_integral<const K: usize, F>(
    data: &GraphFunction,
    edge: usize,
    window: &[f64],
    q: &QuadratureSpec,
    f: F,
) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K],
{
    let Some(breaks) = density_breaks(data, edge, window, q.tail_eps) else {
        return Ok(Integral::zero());
    };
    let profiles: Vec<&Profile> = data.densities_on(edge).collect();
    integrate(
        |y| {
            let rho: f64 = profiles.iter().map(|p| p.eval(y)).sum();
            let mut v = if rho == 0.0 { [0.0; K] } else { f(y) };
            for c in v.iter_mut() {
                *c *= rho;
            }
            v
        },
        &breaks,
        q,
    )
}

fn prepare(graph: &StarGraph, data: &GraphFunction, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<f64> {
    ensure_time(t)?;
    q.validate()?;
    graph.check_point(x)?;
    data.check_against(graph)?;
    tail_radius(t, q.tail_eps)
}

/// Evaluates `u = P_t phi` and its derivatives at `x`.
pub fn apply(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t: f64,
    q: &QuadratureSpec,
) -> Result<SemigroupValue> {
    let r = prepare(graph, data, x, t, q)?;
    let mut sum = [0.0f64; 4];
    for atom in data.atoms() {
        let y = GraphPoint { edge: atom.edge, coord: atom.loc };
        let k = kernel_unchecked(graph, x, &y, t);
        sum[0] += atom.weight * k.value;
        sum[1] += atom.weight * k.d_x;
        sum[2] += atom.weight * k.d_xx;
        sum[3] += atom.weight * k.d_t;
    }
    for j in 0..graph.edge_count() {
        let Some(window) = data_window(data, x, j, r, q.tail_eps) else { continue };
        let res = density_integral(data, j, &window, q, |y| {
            let k = kernel_unchecked(graph, x, &GraphPoint { edge: j, coord: y }, t);
            [k.value, k.d_x, k.d_xx, k.d_t]
        })?;
        for (a, v) in sum.iter_mut().zip(res.value) {
            *a += v;
        }
    }
    let [u, u_x, u_xx, u_t] = sum;
    let spread = if u > 0.0 { centered_second_moment(graph, data, x, t, r, q, u_x / u)? / u } else { f64::NAN };
    Ok(SemigroupValue { u, u_x, u_xx, u_t, t, spread })
}

/// `sum over Gaussian terms of c g(z) (m(z) - mean)^2` integrated against phi,
/// with `m(z) = -z / 2t` the log-slope of each term.
fn centered_second_moment(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t: f64,
    r: f64,
    q: &QuadratureSpec,
    mean: f64,
) -> Result<f64> {
    let term_moment = |y: &GraphPoint| -> f64 {
        let (terms, n) = kernel_terms(graph, x, y);
        terms[..n]
            .iter()
            .map(|term| {
                let d = -term.z / (2.0 * t) - mean;
                term.coef * gauss_value(term.z, t) * d * d
            })
            .sum()
    };
    let mut m2 = 0.0;
    for atom in data.atoms() {
        m2 += atom.weight * term_moment(&GraphPoint { edge: atom.edge, coord: atom.loc });
    }
    for j in 0..graph.edge_count() {
        let Some(window) = data_window(data, x, j, r, q.tail_eps) else { continue };
        let res = density_integral(data, j, &window, q, |y| [term_moment(&GraphPoint { edge: j, coord: y })])?;
        m2 += res.value[0];
    }
    Ok(m2)
}

/// `u = P_t phi(x)` only, without derivatives.
pub fn apply_value(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let r = prepare(graph, data, x, t, q)?;
    let mut u = 0.0;
    for atom in data.atoms() {
        u += atom.weight * kernel_unchecked(graph, x, &GraphPoint { edge: atom.edge, coord: atom.loc }, t).value;
    }
    for j in 0..graph.edge_count() {
        let Some(window) = data_window(data, x, j, r, q.tail_eps) else { continue };
        let res = density_integral(data, j, &window, q, |y| {
            [kernel_unchecked(graph, x, &GraphPoint { edge: j, coord: y }, t).value]
        })?;
        u += res.value[0];
    }
    Ok(u)
}

/// Outcome of the semigroup identity check `P_{t1+t2} = P_{t1} P_{t2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeReport {
    /// `|P_{t1+t2} phi(x) - P_{t1}(P_{t2} phi)(x)|`.
    pub discrepancy: f64,
    /// Direct value `P_{t1+t2} phi(x)`.
    pub direct: f64,
    /// Bound on the error caused by linear interpolation of the intermediate grid.
    pub interpolation_bound: f64,
    pub grid_spacing: f64,
}

impl ComposeReport {
    /// Tolerance the discrepancy is expected to respect.
    pub fn tolerance(&self, q: &QuadratureSpec) -> f64 {
        10.0 * q.rel_tol * self.direct.abs() + self.interpolation_bound
    }
}

/// Four-point Lagrange interpolation of uniform samples, using the stencil
/// that keeps `y` in its middle cell where possible.
fn cubic_sample(values: &[f64], h: f64, y: f64) -> f64 {
    let n = values.len();
    if n < 4 {
        let k = ((y / h).floor() as usize).min(n.saturating_sub(2));
        let frac = y / h - k as f64;
        return if n == 1 { values[0] } else { values[k] + frac * (values[k + 1] - values[k]) };
    }
    let s = y / h;
    let k = ((s.floor() as usize).max(1) - 1).min(n - 4);
    let mut v = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (s - (k + b) as f64) / (a as f64 - b as f64);
            }
        }
        v += w * values[k + a];
    }
    v
}

/// Compares `P_{t1+t2} phi(x)` with `P_{t1}` applied to a sampled copy of
/// `P_{t2} phi`. The intermediate function is sampled on every edge with
/// spacing `min(0.01, sqrt(t2)/100)` over the window seen from `x` at time `t1`
/// and interpolated by piecewise cubics.
pub fn compose_check(
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t1: f64,
    t2: f64,
    q: &QuadratureSpec,
) -> Result<ComposeReport> {
    compose_check_with(Execution::default(), graph, data, x, t1, t2, q)
}

pub fn compose_check_with(
    exec: Execution,
    graph: &StarGraph,
    data: &GraphFunction,
    x: &GraphPoint,
    t1: f64,
    t2: f64,
    q: &QuadratureSpec,
) -> Result<ComposeReport> {
    ensure_time(t1)?;
    ensure_time(t2)?;
    let direct = apply_value(graph, data, x, t1 + t2, q)?;
    let h = 0.01f64.min(t2.sqrt() / 100.0);
    let extent = x.coord + tail_radius(t1, q.tail_eps)?;
    let nodes = (extent / h).ceil() as usize + 1;
    let n_edges = graph.edge_count();
    let samples: Vec<f64> = exec
        .map_range(n_edges * nodes, |k| {
            let p = GraphPoint { edge: k / nodes, coord: (k % nodes) as f64 * h };
            apply_value(graph, data, &p, t2, q)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let r1 = tail_radius(t1, q.tail_eps)?;
    let mut composed = 0.0;
    let mut max_d4 = 0.0f64;
    for (j, values) in samples.chunks(nodes).enumerate() {
        for w in values.windows(5) {
            max_d4 = max_d4.max((w[0] - 4.0 * w[1] + 6.0 * w[2] - 4.0 * w[3] + w[4]).abs());
        }
        let Some(window) = kernel_window(x, j, r1) else { continue };
        let hi = window[window.len() - 1].min(h * (nodes - 1) as f64);
        let lo = window[0];
        if !(hi > lo) {
            continue;
        }
        // Panels end at every grid node so each one sees a single cubic piece.
        let mut breaks: Vec<f64> = (0..nodes).map(|k| k as f64 * h).filter(|y| *y > lo && *y < hi).collect();
        breaks.insert(0, lo);
        breaks.push(hi);
        breaks.extend(window.iter().copied().filter(|w| *w > lo && *w < hi));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let edge_point = |y: f64| GraphPoint { edge: j, coord: y };
        let part = integrate(
            |y| [kernel_unchecked(graph, x, &edge_point(y), t1).value * cubic_sample(values, h, y)],
            &breaks,
            q,
        )?;
        composed += part.value[0];
    }
    Ok(ComposeReport {
        discrepancy: (direct - composed).abs(),
        direct,
        // Four-point Lagrange remainder: max |prod (s - s_i)| / 4! = (9/16) / 24 in grid units.
        interpolation_bound: max_d4 * 9.0 / 16.0 / 24.0,
        grid_spacing: h,
    })
}

/// Outcome of `P_t w = w` for a harmonic `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCheck {
    pub discrepancy: f64,
    /// `P_t w(x)` over the truncated window.
    pub value: f64,
    /// Bound on the contribution of the discarded Gaussian tails against the
    /// linear growth of `w`.
    pub truncation_bound: f64,
}

/// `|P_t w(x) - w(x)|` for a Kirchhoff-linear `w`, integrated over the
/// truncation window. `w` is not integrable, so the result comes with the
/// size of what the truncation discards.
pub fn harmonic_invariance(
    graph: &StarGraph,
    w: &HarmonicFunction,
    x: &GraphPoint,
    t: f64,
    q: &QuadratureSpec,
) -> Result<HarmonicCheck> {
    ensure_time(t)?;
    q.validate()?;
    graph.check_point(x)?;
    if w.slopes().len() != graph.edge_count() {
        return Err(Error::Domain("harmonic function and graph disagree on edge count".into()));
    }
    let r = tail_radius(t, q.tail_eps)?;
    let mut value = 0.0;
    let mut bound = 0.0;
    let tail = gauss_value(r, t);
    for j in 0..graph.edge_count() {
        let (a, b) = (w.slopes()[j], w.value_at_vertex());
        if let Some(window) = kernel_window(x, j, r) {
            let res = integrate(
                |y| [kernel_unchecked(graph, x, &GraphPoint { edge: j, coord: y }, t).value * (a * y + b)],
                &window,
                q,
            )?;
            value += res.value[0];
        }
        // Kernel coefficients are at most 2; tails of g and z g beyond r.
        let lin = a.abs() * (2.0 * t + x.coord * 2.0 * t / r) + b.abs() * 2.0 * t / r;
        bound += 2.0 * 2.0 * lin * tail;
    }
    Ok(HarmonicCheck { discrepancy: (value - w.eval(x)).abs(), value, truncation_bound: bound })
}

/// Evaluates [`apply`] at many points, preserving order.
pub fn apply_many(
    exec: Execution,
    graph: &StarGraph,
    data: &GraphFunction,
    points: &[(GraphPoint, f64)],
    q: &QuadratureSpec,
) -> Result<Vec<SemigroupValue>> {
    exec.try_map(points, |(x, t)| apply(graph, data, x, *t, q))
}
