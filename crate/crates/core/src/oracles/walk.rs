//! Lattice random walk whose scaling limit is the diffusion generated by the
//! graph Laplacian with the weighted Kirchhoff vertex condition.
//!
//! The walker moves `±h` per step of duration `h²/2`. On reaching the vertex
//! it leaves along edge `j` with probability `alpha_j`. Each path owns an
//! independent ChaCha8 stream, so results do not depend on scheduling.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csv::{Cell, CsvWriter};
use crate::error::{ensure_time, Error, Result};
use crate::exec::Execution;
use crate::graph::{GraphPoint, StarGraph};
use crate::kernel::{kernel_unchecked, tail_radius};
use crate::quadrature::{integrate_scalar, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Lattice spacing `h`.
    pub step: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self, t: f64) -> Result<()> {
        ensure_time(t)?;
        if !(self.step > 0.0) || self.step > 0.05 * t.sqrt() {
            return Err(Error::Config(format!(
                "walk step {} must lie in (0, 0.05 sqrt(t)] = (0, {}]",
                self.step,
                0.05 * t.sqrt()
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("walk needs at least one path".into()));
        }
        Ok(())
    }

    /// Number of steps used to reach time `t`.
    pub fn steps(&self, t: f64) -> u64 {
        (2.0 * t / (self.step * self.step)).ceil() as u64
    }

    fn lattice_start(&self, start: &GraphPoint) -> u64 {
        (start.coord / self.step).round() as u64
    }
}

struct Walker {
    rng: ChaCha8Rng,
    bits: u64,
    left: u32,
}

impl Walker {
    fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        Self { rng, bits: 0, left: 0 }
    }

    fn coin(&mut self) -> bool {
        if self.left == 0 {
            self.bits = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.bits & 1 == 1;
        self.bits >>= 1;
        self.left -= 1;
        b
    }

    fn pick_edge(&mut self, cumulative: &[f64]) -> usize {
        let u: f64 = self.rng.random();
        cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
    }
}

fn cumulative_weights(graph: &StarGraph) -> Vec<f64> {
    graph
        .weights()
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect()
}

fn run_path(cumulative: &[f64], start_edge: usize, k0: u64, n: u64, seed: u64, path: u64) -> (usize, u64) {
    let mut w = Walker::new(seed, path);
    let mut k = k0;
    let mut edge = start_edge;
    let mut remaining = n;
    while remaining > 0 {
        if k > 64 && remaining >= 64 {
            // Sixty-four steps at once; the walker cannot reach the vertex.
            let up = w.rng.next_u64().count_ones() as u64;
            k = k + 2 * up - 64;
            remaining -= 64;
            continue;
        }
        if k == 0 {
            edge = w.pick_edge(cumulative);
            k = 1;
        } else if w.coin() {
            k += 1;
        } else {
            k -= 1;
        }
        remaining -= 1;
    }
    if k == 0 {
        edge = w.pick_edge(cumulative);
    }
    (edge, k)
}

/// Terminal positions of `cfg.n_paths` walks started at `start` (rounded to the lattice).
pub fn walk_simulate(graph: &StarGraph, start: &GraphPoint, t: f64, cfg: &WalkConfig) -> Result<Vec<GraphPoint>> {
    walk_simulate_with(Execution::default(), graph, start, t, cfg)
}

pub fn walk_simulate_with(
    exec: Execution,
    graph: &StarGraph,
    start: &GraphPoint,
    t: f64,
    cfg: &WalkConfig,
) -> Result<Vec<GraphPoint>> {
    cfg.validate(t)?;
    graph.check_point(start)?;
    let cumulative = cumulative_weights(graph);
    let n = cfg.steps(t);
    let k0 = cfg.lattice_start(start);
    let h = cfg.step;
    Ok(exec.map_range(cfg.n_paths, |p| {
        let (edge, k) = run_path(&cumulative, start.edge, k0, n, cfg.seed, p as u64);
        GraphPoint { edge, coord: k as f64 * h }
    }))
}

/// CSV with columns `path_id,edge,coord` (1-based edges).
pub fn write_walk_csv<W: Write>(points: &[GraphPoint], out: W) -> std::io::Result<W> {
    let mut w = CsvWriter::new(out, &["path_id", "edge", "coord"])?;
    for (i, p) in points.iter().enumerate() {
        w.row(&[Cell::from(i), Cell::from(p.edge + 1), Cell::from(p.coord)])?;
    }
    w.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinStat {
    pub edge: usize,
    pub lo: f64,
    /// `f64::INFINITY` for the last bin on each edge.
    pub hi: f64,
    pub count: usize,
    pub expected: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkComparison {
    pub n_paths: usize,
    pub edge_frequency: Vec<f64>,
    pub edge_expected: Vec<f64>,
    pub bins: Vec<BinStat>,
    /// Largest `|z|` among bins with an expected count of at least 5.
    pub max_abs_z: f64,
    /// Largest `|z|` of the per-edge counts.
    pub max_edge_z: f64,
}

fn z_score(count: usize, n: usize, p: f64) -> f64 {
    let np = n as f64 * p;
    let var = np * (1.0 - p);
    if var <= 0.0 {
        return if count as f64 == np { 0.0 } else { f64::INFINITY };
    }
    (count as f64 - np) / var.sqrt()
}

/// Simulates the walk and compares binned terminal positions with kernel
/// probabilities from the lattice start point.
///
/// Bin boundaries sit between lattice sites of the reachable parity, so each
/// bin holds the same number of sites. `bins_per_edge` bins cover
/// `[0, start + 8 sqrt(2t)]`; the last one is open-ended.
pub fn walk_compare(
    exec: Execution,
    graph: &StarGraph,
    start: &GraphPoint,
    t: f64,
    cfg: &WalkConfig,
    bins_per_edge: usize,
    q: &QuadratureSpec,
) -> Result<WalkComparison> {
    if bins_per_edge == 0 {
        return Err(Error::Config("need at least one bin per edge".into()));
    }
    q.validate()?;
    let ends = walk_simulate_with(exec, graph, start, t, cfg)?;
    let h = cfg.step;
    let k0 = cfg.lattice_start(start);
    let parity = (k0 + cfg.steps(t)) % 2;
    let x0 = GraphPoint { edge: start.edge, coord: k0 as f64 * h };
    let reach = x0.coord + 8.0 * (2.0 * t).sqrt();
    let m = ((reach / (bins_per_edge as f64 * 2.0 * h)).ceil() as u64).max(1);
    let edge_of = |b: u64| ((2 * m * b + 1 - parity) as f64) * h;
    let tail = x0.coord + tail_radius(t, q.tail_eps)?;
    let n_edges = graph.edge_count();

    let mut counts = vec![vec![0usize; bins_per_edge]; n_edges];
    for p in &ends {
        let k = (p.coord / h).round() as u64;
        let b = if k == 0 { 0 } else { ((k + parity - 1) / (2 * m)) as usize };
        counts[p.edge][b.min(bins_per_edge - 1)] += 1;
    }

    let n = ends.len();
    let density = |edge: usize| move |y: f64| kernel_unchecked(graph, &x0, &GraphPoint { edge, coord: y }, t).value;
    let mut bins = Vec::with_capacity(n_edges * bins_per_edge);
    let mut edge_expected = vec![0.0; n_edges];
    for edge in 0..n_edges {
        for (b, &count) in counts[edge].iter().enumerate() {
            let lo = if b == 0 { 0.0 } else { edge_of(b as u64) };
            let last = b + 1 == bins_per_edge;
            let hi = if last { f64::INFINITY } else { edge_of(b as u64 + 1) };
            let upper = if last { tail.max(lo) } else { hi };
            let mut brk = vec![lo];
            if x0.edge == edge && x0.coord > lo && x0.coord < upper {
                brk.push(x0.coord);
            }
            brk.push(upper);
            let expected = if upper > lo { integrate_scalar(density(edge), &brk, q)? } else { 0.0 };
            edge_expected[edge] += expected;
            bins.push(BinStat { edge, lo, hi, count, expected, z: z_score(count, n, expected) });
        }
    }
    let edge_frequency: Vec<f64> =
        counts.iter().map(|c| c.iter().sum::<usize>() as f64 / n as f64).collect();
    let max_abs_z = bins
        .iter()
        .filter(|s| s.expected * n as f64 >= 5.0)
        .map(|s| s.z.abs())
        .fold(0.0, f64::max);
    let max_edge_z = counts
        .iter()
        .zip(&edge_expected)
        .map(|(c, p)| z_score(c.iter().sum(), n, *p).abs())
        .fold(0.0, f64::max);
    Ok(WalkComparison { n_paths: n, edge_frequency, edge_expected, bins, max_abs_z, max_edge_z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_step() {
        let g = StarGraph::uniform(3).unwrap();
        let cfg = WalkConfig { step: 0.2, n_paths: 10, seed: 1 };
        assert!(walk_simulate(&g, &GraphPoint::vertex(), 1.0, &cfg).is_err());
        let cfg = WalkConfig { step: 0.01, n_paths: 0, seed: 1 };
        assert!(walk_simulate(&g, &GraphPoint::vertex(), 1.0, &cfg).is_err());
    }

    #[test]
    fn parity_and_determinism() {
        let g = StarGraph::new(vec![0.2, 0.3, 0.5]).unwrap();
        let cfg = WalkConfig { step: 0.05, n_paths: 200, seed: 7 };
        let start = GraphPoint { edge: 1, coord: 0.5 };
        let a = walk_simulate_with(Execution::Sequential, &g, &start, 1.0, &cfg).unwrap();
        let b = walk_simulate_with(Execution::Parallel, &g, &start, 1.0, &cfg).unwrap();
        assert_eq!(a.len(), 200);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.edge, q.edge);
            assert_eq!(p.coord.to_bits(), q.coord.to_bits());
        }
        let parity = (10 + cfg.steps(1.0)) % 2;
        for p in &a {
            assert_eq!(((p.coord / 0.05).round() as u64) % 2, parity);
        }
    }

    #[test]
    fn bulk_move_preserves_distribution() {
        // Start far from the vertex: the walk is a plain binomial walk.
        let g = StarGraph::uniform(2).unwrap();
        let cfg = WalkConfig { step: 0.05, n_paths: 4000, seed: 3 };
        let ends = walk_simulate(&g, &GraphPoint { edge: 0, coord: 20.0 }, 1.0, &cfg).unwrap();
        let n = ends.len() as f64;
        let mean = ends.iter().map(|p| p.coord).sum::<f64>() / n;
        let var = ends.iter().map(|p| (p.coord - mean).powi(2)).sum::<f64>() / n;
        assert!((mean - 20.0).abs() < 4.0 * (2.0f64 / n).sqrt(), "{mean}");
        assert!((var - 2.0).abs() < 0.15, "{var}");
    }
}
