//! Geometry of a metric star graph: one vertex `O` joined to `N` half-lines.
//!
//! Edges are indexed from 0 in the API. Each edge is identified with
//! `[0, inf)`, coordinate 0 being the vertex. Serialized forms (JSON configs,
//! CSV output) use 1-based edge numbers.

use crate::error::{Error, Result};

/// Tolerance on `sum(alpha) == 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on the Kirchhoff balance of harmonic slopes.
pub const KIRCHHOFF_TOL: f64 = 1e-12;

/// Star graph with Kirchhoff weights `alpha_1..alpha_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    weights: Vec<f64>,
}

impl StarGraph {
    /// Validates the weights: `N >= 2`, every weight positive, sum equal to 1.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Weight(format!("need at least 2 edges, got {}", weights.len())));
        }
        if let Some(bad) = weights.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::Weight(format!("weights must be positive, got {bad}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Weight(format!("weights must sum to 1, got {sum:.17}")));
        }
        Ok(Self { weights })
    }

    /// `N` equal weights `1/N`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of edge `i` (0-based).
    pub fn alpha(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn point(&self, edge: usize, coord: f64) -> Result<GraphPoint> {
        if edge >= self.edge_count() {
            return Err(Error::Domain(format!(
                "edge index {} out of range 1..={}",
                edge + 1,
                self.edge_count()
            )));
        }
        GraphPoint::new(edge, coord)
    }

    pub(crate) fn check_point(&self, p: &GraphPoint) -> Result<()> {
        if p.edge >= self.edge_count() {
            return Err(Error::Domain(format!(
                "edge index {} out of range 1..={}",
                p.edge + 1,
                self.edge_count()
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`StarGraph::new`].
pub fn validate_graph(weights: &[f64]) -> Result<StarGraph> {
    StarGraph::new(weights.to_vec())
}

/// A point `(edge, coord)` on the graph. All points with `coord == 0`
/// denote the vertex and compare equal.
#[derive(Debug, Clone, Copy)]
pub struct GraphPoint {
    pub edge: usize,
    pub coord: f64,
}

impl GraphPoint {
    pub fn new(edge: usize, coord: f64) -> Result<Self> {
        if !(coord >= 0.0) || !coord.is_finite() {
            return Err(Error::Domain(format!("coordinate must be finite and >= 0, got {coord}")));
        }
        Ok(Self { edge, coord })
    }

    pub fn vertex() -> Self {
        Self { edge: 0, coord: 0.0 }
    }

    pub fn is_vertex(&self) -> bool {
        self.coord == 0.0
    }

    /// Both points lie on one closed edge. The vertex lies on every edge.
    pub fn shares_edge(&self, other: &GraphPoint) -> bool {
        self.edge == other.edge || self.is_vertex() || other.is_vertex()
    }
}

impl PartialEq for GraphPoint {
    fn eq(&self, other: &Self) -> bool {
        distance(self, other) == 0.0
    }
}

/// Geodesic distance: `|x - y|` on a common edge, `x + y` across the vertex.
pub fn distance(p: &GraphPoint, q: &GraphPoint) -> f64 {
    if p.edge == q.edge {
        (p.coord - q.coord).abs()
    } else {
        p.coord + q.coord
    }
}

/// Membership in the closed ball `B_R` around the vertex.
pub fn in_ball(p: &GraphPoint, radius: f64) -> bool {
    p.coord <= radius
}

/// A Kirchhoff-linear function `w_i(x) = a_i x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFunction {
    slopes: Vec<f64>,
    value_at_vertex: f64,
}

impl HarmonicFunction {
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn value_at_vertex(&self) -> f64 {
        self.value_at_vertex
    }

    pub fn eval(&self, p: &GraphPoint) -> f64 {
        self.slopes[p.edge] * p.coord + self.value_at_vertex
    }

    /// A harmonic function is bounded on the graph iff every slope is zero.
    pub fn is_bounded(&self) -> bool {
        self.slopes.iter().all(|a| *a == 0.0)
    }
}

/// Builds a harmonic function, enforcing the flux balance `sum(alpha_i a_i) = 0`.
///
/// The balance is on slopes (the derivative condition at the vertex), which
/// is the condition the heat problem imposes; a balance on values would force
/// `b = 0` for every harmonic function.
pub fn make_harmonic(graph: &StarGraph, slopes: &[f64], b: f64) -> Result<HarmonicFunction> {
    if slopes.len() != graph.edge_count() {
        return Err(Error::Domain(format!(
            "expected {} slopes, got {}",
            graph.edge_count(),
            slopes.len()
        )));
    }
    let flux: f64 = graph.weights().iter().zip(slopes).map(|(a, s)| a * s).sum();
    if flux.abs() > KIRCHHOFF_TOL {
        return Err(Error::Kirchhoff(flux));
    }
    Ok(HarmonicFunction { slopes: slopes.to_vec(), value_at_vertex: b })
}

pub fn eval_harmonic(h: &HarmonicFunction, p: &GraphPoint) -> f64 {
    h.eval(p)
}
