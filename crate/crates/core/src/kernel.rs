//! The scalar Gaussian heat kernel and the star-graph kernel built from it.
//!
//! For `x` on edge `i` and `y` on edge `j`:
//!
//! ```text
//! Gamma_i(x, y, t) = 2 alpha_j g(x + y, t)                       j != i
//!                  = g(x - y, t) + (2 alpha_i - 1) g(x + y, t)    j == i
//! ```
//!
//! Derivatives are with respect to the first argument `x` and to `t`, and
//! are exact.

use crate::error::{ensure_time, Error, Result};
use crate::graph::{GraphPoint, StarGraph};
use crate::quadrature::{integrate, QuadratureSpec};

const FRAC_1_SQRT_4PI: f64 = 0.282_094_791_773_878_143_474_039_725_780_386_3;
/// Exponents below this underflow to an exact zero.
pub const EXP_UNDERFLOW: f64 = -745.0;

/// A kernel value together with its first/second spatial and first time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelValue {
    pub value: f64,
    pub d_x: f64,
    pub d_xx: f64,
    pub d_t: f64,
}

impl KernelValue {
    pub const ZERO: KernelValue = KernelValue { value: 0.0, d_x: 0.0, d_xx: 0.0, d_t: 0.0 };

    fn scaled(self, c: f64) -> Self {
        KernelValue { value: c * self.value, d_x: c * self.d_x, d_xx: c * self.d_xx, d_t: c * self.d_t }
    }

    fn plus(self, o: Self) -> Self {
        KernelValue {
            value: self.value + o.value,
            d_x: self.d_x + o.d_x,
            d_xx: self.d_xx + o.d_xx,
            d_t: self.d_t + o.d_t,
        }
    }
}

/// `g(z, t) = (4 pi t)^{-1/2} exp(-z^2 / 4t)` without validation of `t`.
#[inline]
pub(crate) fn gauss_value(z: f64, t: f64) -> f64 {
    let e = -z * z / (4.0 * t);
    if e < EXP_UNDERFLOW {
        0.0
    } else {
        FRAC_1_SQRT_4PI / t.sqrt() * e.exp()
    }
}

#[inline]
pub(crate) fn gauss_unchecked(z: f64, t: f64) -> KernelValue {
    let value = gauss_value(z, t);
    if value == 0.0 {
        return KernelValue::ZERO;
    }
    let d_z = -z / (2.0 * t) * value;
    let d_zz = (z * z / (4.0 * t * t) - 1.0 / (2.0 * t)) * value;
    // Time derivative from d/dt g = (z^2/4t^2 - 1/2t) g.
    let d_t = (z * z / (4.0 * t * t)) * value - value / (2.0 * t);
    KernelValue { value, d_x: d_z, d_xx: d_zz, d_t }
}

/// Standard heat kernel on the line with its `z` and `t` derivatives.
pub fn gauss(z: f64, t: f64) -> Result<KernelValue> {
    ensure_time(t)?;
    Ok(gauss_unchecked(z, t))
}

/// One Gaussian term `coef * g(z, t)` of a star-graph kernel, where `z` moves
/// with unit speed in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    pub coef: f64,
    pub z: f64,
}

/// The Gaussian terms of `Gamma_i(x, y, t)` (one or two of them).
pub fn kernel_terms(graph: &StarGraph, x: &GraphPoint, y: &GraphPoint) -> ([GaussTerm; 2], usize) {
    let (a, b) = (x.coord, y.coord);
    if x.edge == y.edge {
        let ai = graph.alpha(x.edge);
        ([GaussTerm { coef: 1.0, z: a - b }, GaussTerm { coef: 2.0 * ai - 1.0, z: a + b }], 2)
    } else {
        let aj = graph.alpha(y.edge);
        ([GaussTerm { coef: 2.0 * aj, z: a + b }, GaussTerm { coef: 0.0, z: a + b }], 1)
    }
}

#[inline]
pub(crate) fn kernel_unchecked(graph: &StarGraph, x: &GraphPoint, y: &GraphPoint, t: f64) -> KernelValue {
    let (terms, n) = kernel_terms(graph, x, y);
    terms[..n]
        .iter()
        .filter(|term| term.coef != 0.0)
        .fold(KernelValue::ZERO, |acc, term| acc.plus(gauss_unchecked(term.z, t).scaled(term.coef)))
}

/// Star-graph heat kernel `Gamma_{edge(x)}(x, y, t)` and its derivatives in `x` and `t`.
///
/// At `coord(x) = 0` the edge supplied with `x` selects the one-sided
/// derivative; the value itself does not depend on it.
pub fn kernel(graph: &StarGraph, x: &GraphPoint, y: &GraphPoint, t: f64) -> Result<KernelValue> {
    ensure_time(t)?;
    graph.check_point(x)?;
    graph.check_point(y)?;
    Ok(kernel_unchecked(graph, x, y, t))
}

/// Radius `r` with `exp(-r^2 / 4t) = eps`.
pub fn tail_radius(t: f64, eps: f64) -> Result<f64> {
    ensure_time(t)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("tail epsilon must lie in (0,1), got {eps}")));
    }
    Ok(2.0 * (t * (1.0 / eps).ln()).sqrt())
}

/// Breakpoints of the window on edge `edge` outside which `Gamma(x, ., t)`
/// is below the tail cutoff, or `None` when the whole edge is negligible.
pub(crate) fn kernel_window(x: &GraphPoint, edge: usize, radius: f64) -> Option<Vec<f64>> {
    let a = x.coord;
    if edge == x.edge {
        let lo = (a - radius).max(0.0);
        let mut v = vec![lo];
        if a > lo {
            v.push(a);
        }
        v.push(a + radius);
        Some(v)
    } else if a < radius {
        Some(vec![0.0, radius - a])
    } else {
        None
    }
}

/// Total mass `sum_j int_0^inf Gamma_{edge(x)}(x, y, t) dy`, by quadrature.
/// Equals one up to quadrature and truncation error.
pub fn kernel_mass(graph: &StarGraph, x: &GraphPoint, t: f64, q: &QuadratureSpec) -> Result<f64> {
    ensure_time(t)?;
    graph.check_point(x)?;
    let r = tail_radius(t, q.tail_eps)?;
    let mut mass = 0.0;
    for j in 0..graph.edge_count() {
        let Some(breaks) = kernel_window(x, j, r) else { continue };
        let res = integrate(
            |y| [kernel_unchecked(graph, x, &GraphPoint { edge: j, coord: y }, t).value],
            &breaks,
            q,
        )?;
        mass += res.value[0];
    }
    Ok(mass)
}
