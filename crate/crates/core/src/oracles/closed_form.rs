//! Closed forms for two three-edge examples with `alpha_j = 1/3`:
//! unit atoms at coordinate 1 on every edge, and a single unit atom at
//! coordinate 1 on the third edge.

use crate::error::{ensure_time, Error, Result};

const FRAC_1_SQRT_4PI: f64 = 0.282_094_791_773_878_143_474_039_725_780_386_3;

fn g(z: f64, t: f64) -> f64 {
    FRAC_1_SQRT_4PI / t.sqrt() * (-z * z / (4.0 * t)).exp()
}

/// `g(x+1, t) + g(x-1, t)` on every edge.
pub fn example1_u(x: f64, t: f64) -> Result<f64> {
    ensure_time(t)?;
    Ok(g(x + 1.0, t) + g(x - 1.0, t))
}

/// `-1/(2t) + e^{-x/t} / (t^2 (1 + e^{-x/t})^2)`.
pub fn example1_lhs(x: f64, t: f64) -> Result<f64> {
    ensure_time(t)?;
    let e = (-x / t).exp();
    Ok(-1.0 / (2.0 * t) + e / (t * t * (1.0 + e) * (1.0 + e)))
}

fn check_edge(edge: usize) -> Result<()> {
    if edge < 3 {
        Ok(())
    } else {
        Err(Error::Domain(format!("example 2 has edges 1..=3, got {}", edge + 1)))
    }
}

/// `(2/3) g(x+1, t)` on edges 1 and 2, `g(x-1, t) - g(x+1, t)/3` on edge 3.
/// Edges are 0-based.
pub fn example2_u(edge: usize, x: f64, t: f64) -> Result<f64> {
    ensure_time(t)?;
    check_edge(edge)?;
    Ok(if edge < 2 { 2.0 / 3.0 * g(x + 1.0, t) } else { g(x - 1.0, t) - g(x + 1.0, t) / 3.0 })
}

/// `-1/(2t)` on edges 1 and 2; on edge 3
/// `-1/(2t) - (e^{-x/t}/3) / (t^2 (1 - e^{-x/t}/3)^2)`.
pub fn example2_lhs(edge: usize, x: f64, t: f64) -> Result<f64> {
    ensure_time(t)?;
    check_edge(edge)?;
    if edge < 2 {
        return Ok(-1.0 / (2.0 * t));
    }
    let e = (-x / t).exp() / 3.0;
    Ok(-1.0 / (2.0 * t) - e / (t * t * (1.0 - e) * (1.0 - e)))
}
