//! Crank-Nicolson finite differences for the heat equation on a star graph
//! truncated at length `L` per edge.
//!
//! Nodes `x_k = k dx`, `dx = L/(nx+1)`; node 0 is the shared vertex value,
//! node `nx+1` carries a homogeneous Dirichlet condition. The vertex row is
//! the second-order one-sided Kirchhoff flux
//! `sum_j alpha_j (-3 u_O + 4 u_{j,1} - u_{j,2}) / (2 dx) = 0`, imposed at
//! every new time level. Each step eliminates the vertex unknown from the
//! per-edge tridiagonal systems. The first step is taken with backward Euler
//! sub-steps so that atoms mollified onto a single node do not leave an
//! undamped oscillation behind.

use std::io::Write;

use crate::csv::{Cell, CsvWriter};
use crate::data::GraphFunction;
use crate::error::{Error, Result};
use crate::graph::{GraphPoint, StarGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Truncation length per edge.
    pub length: f64,
    /// Interior nodes per edge.
    pub nx: usize,
    /// Time steps.
    pub nt: usize,
    /// Final time.
    pub t_final: f64,
    /// Store a snapshot every this many steps (final state is always stored).
    pub save_every: Option<usize>,
}

impl FdConfig {
    pub fn new(length: f64, nx: usize, nt: usize, t_final: f64) -> Self {
        Self { length, nx, nt, t_final, save_every: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("FD length must be positive, got {}", self.length)));
        }
        if self.nx < 16 {
            return Err(Error::Config(format!("FD needs nx >= 16, got {}", self.nx)));
        }
        if self.nt < 8 {
            return Err(Error::Config(format!("FD needs nt >= 8, got {}", self.nt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("FD final time must be positive, got {}", self.t_final)));
        }
        if self.save_every == Some(0) {
            return Err(Error::Config("save_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether the truncation is far enough from coordinates up to `x_max`
    /// for a comparison against the unbounded problem.
    pub fn covers(&self, x_max: f64) -> bool {
        self.length >= x_max + self.margin()
    }

    fn margin(&self) -> f64 {
        12.0 * (2.0 * self.t_final).sqrt()
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.nx + 1) as f64
    }
}

/// Snapshots of the discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub dx: f64,
    pub times: Vec<f64>,
    /// `snapshots[s][j][k]`: value at node `k` (0 = vertex) of edge `j`.
    pub snapshots: Vec<Vec<Vec<f64>>>,
    /// Largest vertex flux residual over all steps.
    pub kirchhoff_residual: f64,
    weights: Vec<f64>,
}

impl FdSolution {
    pub fn final_state(&self) -> &[Vec<f64>] {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least one snapshot")
    }

    /// Four-point Lagrange interpolation of the final state.
    pub fn value_at(&self, p: &GraphPoint) -> f64 {
        let nodes = &self.final_state()[p.edge];
        let last = nodes.len() - 1;
        let s = p.coord / self.dx;
        if s >= last as f64 {
            return 0.0;
        }
        let k = (s.floor() as usize).clamp(1, last.saturating_sub(2)) - 1;
        let xs = [k as f64, k as f64 + 1.0, k as f64 + 2.0, k as f64 + 3.0];
        let mut v = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - xs[b]) / (xs[a] - xs[b]);
                }
            }
            v += w * nodes[k + a];
        }
        v
    }

    /// `sum_j alpha_j int u_j` by the trapezoid rule, for snapshot `s`.
    pub fn weighted_mass(&self, s: usize) -> f64 {
        self.snapshots[s]
            .iter()
            .zip(&self.weights)
            .map(|(nodes, a)| {
                let n = nodes.len();
                a * self.dx * (nodes.iter().sum::<f64>() - 0.5 * (nodes[0] + nodes[n - 1]))
            })
            .sum()
    }

    /// CSV with columns `edge,x,t,u` (1-based edges), one row per node and snapshot.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<W> {
        let mut w = CsvWriter::new(out, &["edge", "x", "t", "u"])?;
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (j, nodes) in snap.iter().enumerate() {
                for (k, u) in nodes.iter().enumerate() {
                    w.row(&[Cell::from(j + 1), Cell::from(k as f64 * self.dx), Cell::from(*t), Cell::from(*u)])?;
                }
            }
        }
        w.finish()
    }
}

/// Thomas factorization of a constant symmetric tridiagonal matrix.
struct Tridiagonal {
    sub: f64,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, diag: f64, off: f64) -> Result<Self> {
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let d = diag - off * prev;
            if d.abs() < f64::EPSILON {
                return Err(Error::SingularSystem(format!("zero pivot at row {i}")));
            }
            denom[i] = d;
            c_prime[i] = off / d;
            prev = c_prime[i];
        }
        Ok(Self { sub: off, c_prime, denom })
    }

    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] /= self.denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub * rhs[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

/// One theta-scheme step `(I - theta r D) u' = (I + (1 - theta) r D) u`
/// with `D` the second difference and `r = dt / dx^2`.
struct Stepper {
    theta: f64,
    r: f64,
    tri: Tridiagonal,
    /// Interior response to a unit vertex value.
    z: Vec<f64>,
    vertex_coef: f64,
}

impl Stepper {
    fn new(nx: usize, theta: f64, r: f64) -> Result<Self> {
        let tri = Tridiagonal::new(nx, 1.0 + 2.0 * theta * r, -theta * r)?;
        let mut z = vec![0.0; nx];
        z[0] = theta * r;
        tri.solve_in_place(&mut z);
        let vertex_coef = -3.0 + 4.0 * z[0] - z[1];
        if vertex_coef.abs() < 1e-14 {
            return Err(Error::SingularSystem("vertex row is degenerate".into()));
        }
        Ok(Self { theta, r, tri, z, vertex_coef })
    }

    /// Advances `u` in place and returns the weighted vertex flux
    /// `sum_j alpha_j (-3 u_O + 4 u_{j,1} - u_{j,2})` of the new state.
    fn advance(&self, graph: &StarGraph, u: &mut [Vec<f64>], rhs: &mut [Vec<f64>]) -> f64 {
        let nx = self.z.len();
        let explicit = (1.0 - self.theta) * self.r;
        let u_o = u[0][0];
        for (nodes, b) in u.iter().zip(rhs.iter_mut()) {
            for k in 1..=nx {
                let left = if k == 1 { u_o } else { nodes[k - 1] };
                b[k - 1] = nodes[k] + explicit * (left - 2.0 * nodes[k] + nodes[k + 1]);
            }
            self.tri.solve_in_place(b);
        }
        let acc: f64 = rhs.iter().enumerate().map(|(j, y)| graph.alpha(j) * (4.0 * y[0] - y[1])).sum();
        let new_o = -acc / self.vertex_coef;
        let mut flux = 0.0;
        for (j, nodes) in u.iter_mut().enumerate() {
            nodes[0] = new_o;
            for k in 1..=nx {
                nodes[k] = rhs[j][k - 1] + self.z[k - 1] * new_o;
            }
            nodes[nx + 1] = 0.0;
            flux += graph.alpha(j) * (-3.0 * new_o + 4.0 * nodes[1] - nodes[2]);
        }
        flux
    }
}

fn initial_state(graph: &StarGraph, data: &GraphFunction, cfg: &FdConfig) -> Result<Vec<Vec<f64>>> {
    let n_edges = graph.edge_count();
    let dx = cfg.dx();
    let mut u = vec![vec![0.0; cfg.nx + 2]; n_edges];
    for (j, nodes) in u.iter_mut().enumerate() {
        for (k, v) in nodes.iter_mut().enumerate().take(cfg.nx + 1).skip(1) {
            *v = data.eval_density(&GraphPoint { edge: j, coord: k as f64 * dx });
        }
    }
    let vertex: f64 =
        (0..n_edges).map(|j| graph.alpha(j) * data.eval_density(&GraphPoint { edge: j, coord: 0.0 })).sum();
    let reach = cfg.length - cfg.margin();
    for a in data.atoms() {
        if a.loc > reach {
            return Err(Error::Config(format!(
                "atom at {} lies beyond L - 12 sqrt(2T) = {reach}; enlarge the domain",
                a.loc
            )));
        }
        // The scheme conserves sum_j alpha_j dx (3/2 u_{j,1} + sum_{k>=2} u_{j,k}):
        // the vertex row carries no mass of its own and the one-sided flux
        // stencil gives the first node weight 3/2.
        let k = (a.loc / dx).round() as usize;
        if k == 0 {
            // A vertex atom goes to the first node of every edge: the exact
            // solution is the same on all edges, with weighted mass alpha_k w.
            let bump = graph.alpha(a.edge) * a.weight / (1.5 * dx);
            for nodes in u.iter_mut() {
                nodes[1] += bump;
            }
        } else {
            let node_weight = if k == 1 { 1.5 } else { 1.0 };
            u[a.edge][k] += a.weight / (node_weight * dx);
        }
    }
    for nodes in u.iter_mut() {
        nodes[0] = vertex;
    }
    Ok(u)
}

/// Solves the truncated problem up to `cfg.t_final`.
pub fn fd_solve(graph: &StarGraph, data: &GraphFunction, cfg: &FdConfig) -> Result<FdSolution> {
    cfg.validate()?;
    data.check_against(graph)?;
    let n_edges = graph.edge_count();
    let nx = cfg.nx;
    let dx = cfg.dx();
    let dt = cfg.t_final / cfg.nt as f64;
    let cn = Stepper::new(nx, 0.5, dt / (dx * dx))?;
    // Rannacher start: the first step is four backward-Euler quarter steps, which
    // damp the grid-scale modes that Crank-Nicolson alone never removes.
    let start = Stepper::new(nx, 1.0, 0.25 * dt / (dx * dx))?;

    let mut u = initial_state(graph, data, cfg)?;
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let save = cfg.save_every;
    if save.is_some() {
        times.push(0.0);
        snapshots.push(u.clone());
    }
    let mut residual = 0.0f64;
    let mut rhs = vec![vec![0.0; nx]; n_edges];
    for step in 1..=cfg.nt {
        let (stepper, sub) = if step == 1 { (&start, 4) } else { (&cn, 1) };
        for _ in 0..sub {
            let flux = stepper.advance(graph, &mut u, &mut rhs);
            residual = residual.max((flux / (2.0 * dx)).abs());
        }
        let is_last = step == cfg.nt;
        if is_last || save.is_some_and(|e| step % e == 0) {
            times.push(step as f64 * dt);
            snapshots.push(u.clone());
        }
    }
    Ok(FdSolution { dx, times, snapshots, kirchhoff_residual: residual, weights: graph.weights().to_vec() })
}
