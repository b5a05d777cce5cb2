//! JSON run configuration.

use serde::Deserialize;
use starheat::{GraphFunction, GraphPoint, QuadratureSpec, StarGraph};

use crate::Failure;

/// Either an explicit list or `n` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, n: usize },
}

impl Default for Grid {
    fn default() -> Self {
        Grid::List(Vec::new())
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { n: 0, .. } => Vec::new(),
            Grid::Range { start, n: 1, .. } => vec![*start],
            Grid::Range { start, stop, n } => {
                (0..*n).map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64).collect()
            }
        }
    }
}

/// Coordinates on a set of edges (1-based; all edges when omitted).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointGrid {
    pub edges: Option<Vec<usize>>,
    #[serde(default)]
    pub coords: Grid,
}

impl PointGrid {
    pub fn points(&self, graph: &StarGraph) -> Result<Vec<GraphPoint>, Failure> {
        let edges: Vec<usize> = match &self.edges {
            Some(e) => e.clone(),
            None => (1..=graph.edge_count()).collect(),
        };
        let coords = self.coords.values();
        let mut out = Vec::with_capacity(edges.len() * coords.len());
        for &e in &edges {
            if e == 0 {
                return Err(Failure::Config("edges are numbered from 1".into()));
            }
            for &c in &coords {
                out.push(graph.point(e - 1, c)?);
            }
        }
        Ok(out)
    }
}

/// A single point in JSON form (`edge` is 1-based).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub edge: usize,
    pub coord: f64,
}

impl PointSpec {
    pub fn resolve(&self, graph: &StarGraph) -> Result<GraphPoint, Failure> {
        if self.edge == 0 {
            return Err(Failure::Config("edges are numbered from 1".into()));
        }
        Ok(graph.point(self.edge - 1, self.coord)?)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default)]
    pub x: PointGrid,
    #[serde(default)]
    pub y: PointGrid,
    #[serde(default)]
    pub t: Grid,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default)]
    pub points: PointGrid,
    #[serde(default)]
    pub t: Grid,
}

fn default_r_grid() -> usize {
    starheat::analysis::DEFAULT_R_GRID
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSection {
    #[serde(default)]
    pub x: PointGrid,
    #[serde(default)]
    pub y: PointGrid,
    #[serde(default)]
    pub t: Grid,
    #[serde(default)]
    pub s: Grid,
    #[serde(default = "default_r_grid")]
    pub r_grid: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    pub length: f64,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub save_every: Option<usize>,
    /// Points at which the final state is compared with the kernel pipeline.
    #[serde(default)]
    pub probes: PointGrid,
}

fn default_bins() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    pub start: PointSpec,
    pub t: f64,
    pub step: f64,
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplesSection {
    #[serde(default)]
    pub x: Grid,
    #[serde(default)]
    pub t: Grid,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weights: Option<Vec<f64>>,
    pub data: Option<GraphFunction>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub output: Option<String>,
    pub kernel: Option<KernelSection>,
    pub liyau_scan: Option<ScanSection>,
    pub harnack: Option<HarnackSection>,
    pub oracle_fd: Option<FdSection>,
    pub oracle_walk: Option<WalkSection>,
    pub examples: Option<ExamplesSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Failure::Config(format!("invalid config: {e}")))?;
        cfg.quadrature.validate()?;
        Ok(cfg)
    }

    pub fn graph(&self) -> Result<StarGraph, Failure> {
        let w = self.weights.clone().ok_or_else(|| Failure::Config("config needs \"weights\"".into()))?;
        Ok(StarGraph::new(w)?)
    }

    /// Graph plus initial data, checked against each other.
    pub fn problem(&self) -> Result<(StarGraph, GraphFunction), Failure> {
        let g = self.graph()?;
        let f = self.data.clone().ok_or_else(|| Failure::Config("config needs \"data\"".into()))?;
        f.check_against(&g)?;
        Ok((g, f))
    }

    pub fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T, Failure> {
        s.as_ref().ok_or_else(|| Failure::Config(format!("config needs a \"{name}\" section")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: Grid = serde_json::from_str("[1, 2.5]").unwrap();
        assert_eq!(g.values(), vec![1.0, 2.5]);
        let g: Grid = serde_json::from_str(r#"{"start": 0, "stop": 1, "n": 5}"#).unwrap();
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = serde_json::from_str(r#"{"start": 3, "stop": 1, "n": 1}"#).unwrap();
        assert_eq!(g.values(), vec![3.0]);
        let g: Grid = serde_json::from_str(r#"{"start": 0, "stop": 1, "n": 0}"#).unwrap();
        assert!(g.values().is_empty());
    }

    #[test]
    fn config_sections() {
        let text = r#"{
            "weights": [0.5, 0.5],
            "data": {"atoms": [{"edge": 1, "loc": 0.0, "w": 1.0}]},
            "quadrature": {"rel_tol": 1e-9},
            "liyau_scan": {"points": {"edges": [2], "coords": [0, 1]}, "t": [1]}
        }"#;
        let cfg = RunConfig::parse(text).unwrap();
        let (g, f) = cfg.problem().unwrap();
        assert_eq!(f.atoms().len(), 1);
        assert_eq!(cfg.quadrature.rel_tol, 1e-9);
        let pts = cfg.liyau_scan.as_ref().unwrap().points.points(&g).unwrap();
        assert_eq!(pts[1], GraphPoint { edge: 1, coord: 1.0 });
        assert!(cfg.section("kernel", &cfg.kernel).is_err());
    }

    #[test]
    fn bad_configs_are_config_failures() {
        for text in [
            "{",
            r#"{"weights": [0.5, 0.5], "bogus": 1}"#,
            r#"{"quadrature": {"rel_tol": -1}}"#,
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Failure::Config(_))), "{text}");
        }
        let cfg = RunConfig::parse(r#"{"weights": [0.5, 0.6]}"#).unwrap();
        assert!(matches!(cfg.graph(), Err(Failure::Config(_))));
        let cfg = RunConfig::parse(r#"{"weights": [0.5, 0.5], "data": {"atoms": [{"edge": 3, "loc": 1, "w": 1}]}}"#).unwrap();
        assert!(matches!(cfg.problem(), Err(Failure::Config(_))));
    }
}
