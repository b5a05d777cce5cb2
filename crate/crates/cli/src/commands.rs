//! One function per subcommand. Each writes its CSV to `out` and returns the
//! summary line printed on standard output.

use std::io::Write;

use log::info;
use starheat::analysis::{harnack_report, liyau_scan};
use starheat::csv::{Cell, CsvWriter};
use starheat::oracles::{
    example1_lhs, example1_u, example2_lhs, example2_u, fd_solve, walk_compare, write_walk_csv, FdConfig, WalkConfig,
};
use starheat::semigroup::apply_many;
use starheat::{apply, kernel, Execution, GraphFunction, GraphPoint, StarGraph};

use crate::config::RunConfig;
use crate::Failure;

fn cells_of_point(p: &GraphPoint) -> [Cell; 2] {
    [Cell::from(p.edge + 1), Cell::from(p.coord)]
}

fn io(e: std::io::Error) -> Failure {
    Failure::Numeric(format!("cannot write output: {e}"))
}

pub fn kernel_cmd<W: Write>(cfg: &RunConfig, exec: Execution, out: W) -> Result<String, Failure> {
    let g = cfg.graph()?;
    let sec = cfg.section("kernel", &cfg.kernel)?;
    let xs = sec.x.points(&g)?;
    let ys = sec.y.points(&g)?;
    let ts = sec.t.values();
    let mut jobs = Vec::with_capacity(xs.len() * ys.len() * ts.len());
    for x in &xs {
        for y in &ys {
            for &t in &ts {
                jobs.push((*x, *y, t));
            }
        }
    }
    let values = exec.try_map(&jobs, |(x, y, t)| kernel(&g, x, y, *t))?;
    let mut w = CsvWriter::new(out, &["edge_x", "x", "edge_y", "y", "t", "gamma", "gamma_dx", "gamma_dxx", "gamma_dt"])
        .map_err(io)?;
    for ((x, y, t), k) in jobs.iter().zip(&values) {
        let [ex, cx] = cells_of_point(x);
        let [ey, cy] = cells_of_point(y);
        w.row(&[ex, cx, ey, cy, Cell::from(*t), k.value.into(), k.d_x.into(), k.d_xx.into(), k.d_t.into()])
            .map_err(io)?;
    }
    w.finish().map_err(io)?;
    Ok(format!("kernel: {} rows", jobs.len()))
}

pub fn liyau_scan_cmd<W: Write>(cfg: &RunConfig, exec: Execution, out: W) -> Result<String, Failure> {
    let (g, f) = cfg.problem()?;
    let sec = cfg.section("liyau_scan", &cfg.liyau_scan)?;
    let ts = sec.t.values();
    let samples: Vec<(GraphPoint, f64)> =
        sec.points.points(&g)?.into_iter().flat_map(|p| ts.iter().map(move |&t| (p, t))).collect();
    info!("evaluating {} Li-Yau samples", samples.len());
    let reps = liyau_scan(exec, &g, &f, &samples, &cfg.quadrature)?;
    let mut w = CsvWriter::new(
        out,
        &[
            "edge", "x", "t", "u", "u_x", "u_xx", "u_t", "lhs", "I_term", "rhs", "margin", "bound_x", "bound_l1",
            "I_term_exact", "rhs_exact", "margin_exact",
        ],
    )
    .map_err(io)?;
    for r in &reps {
        let [e, x] = cells_of_point(&r.point);
        w.row(&[
            e,
            x,
            r.t.into(),
            r.u.into(),
            r.u_x.into(),
            r.u_xx.into(),
            r.u_t.into(),
            r.lhs.into(),
            r.i_term.into(),
            r.rhs.into(),
            r.margin.into(),
            r.bound_x.into(),
            r.bound_l1.into(),
            r.i_term_exact.into(),
            r.rhs_exact.into(),
            r.margin_exact.into(),
        ])
        .map_err(io)?;
    }
    w.finish().map_err(io)?;
    let worst = reps.iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
    let worst_exact = reps.iter().map(|r| r.margin_exact).fold(f64::INFINITY, f64::min);
    Ok(match worst {
        None => "liyau-scan: 0 rows".to_string(),
        Some(r) => format!(
            "liyau-scan: {} rows; min margin {:.6e} at edge {} x {} t {}; min margin_exact {:.6e}",
            reps.len(),
            r.margin,
            r.point.edge + 1,
            r.point.coord,
            r.t,
            worst_exact
        ),
    })
}

pub fn harnack_cmd<W: Write>(cfg: &RunConfig, exec: Execution, out: W) -> Result<String, Failure> {
    let (g, f) = cfg.problem()?;
    let sec = cfg.section("harnack", &cfg.harnack)?;
    if sec.r_grid < 2 {
        return Err(Failure::Config("harnack.r_grid must be at least 2".into()));
    }
    let xs = sec.x.points(&g)?;
    let ys = sec.y.points(&g)?;
    let (ts, ss) = (sec.t.values(), sec.s.values());
    let mut jobs = Vec::new();
    for x in &xs {
        for y in &ys {
            for &t in &ts {
                for &s in ss.iter().filter(|&&s| s > 0.0 && s < t) {
                    jobs.push((*x, *y, t, s));
                }
            }
        }
    }
    info!("evaluating {} Harnack samples", jobs.len());
    let reps = exec.try_map(&jobs, |(x, y, t, s)| harnack_report(&g, &f, x, y, *t, *s, &cfg.quadrature, sec.r_grid))?;
    let mut w = CsvWriter::new(out, &["edge_x", "x", "edge_y", "y", "t", "s", "ratio", "rho", "C", "rhs", "margin"])
        .map_err(io)?;
    for r in &reps {
        let [ex, cx] = cells_of_point(&r.x);
        let [ey, cy] = cells_of_point(&r.y);
        w.row(&[ex, cx, ey, cy, r.t.into(), r.s.into(), r.ratio.into(), r.rho.into(), r.c.into(), r.rhs.into(), r.margin.into()])
            .map_err(io)?;
    }
    w.finish().map_err(io)?;
    let worst = reps.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("harnack: {} rows; min margin {worst:.6e}", reps.len()))
}

pub fn oracle_fd_cmd<W: Write>(cfg: &RunConfig, out: W) -> Result<String, Failure> {
    let (g, f) = cfg.problem()?;
    let sec = cfg.section("oracle_fd", &cfg.oracle_fd)?;
    let fd = FdConfig { save_every: sec.save_every, ..FdConfig::new(sec.length, sec.nx, sec.nt, sec.t_final) };
    let sol = fd_solve(&g, &f, &fd)?;
    sol.write_csv(out).map_err(io)?;
    let mut summary = format!(
        "oracle-fd: {} snapshots; Kirchhoff residual {:.3e}; weighted mass {:.12e}",
        sol.snapshots.len(),
        sol.kirchhoff_residual,
        sol.weighted_mass(sol.snapshots.len() - 1)
    );
    let probes = sec.probes.points(&g)?;
    if !probes.is_empty() {
        let x_max = probes.iter().map(|p| p.coord).fold(0.0, f64::max);
        if !fd.covers(x_max) {
            log::warn!("L = {} is short of x_max + 12 sqrt(2T); truncation may dominate", fd.length);
        }
        let at: Vec<_> = probes.iter().map(|p| (*p, sol.final_time())).collect();
        let exact = apply_many(Execution::default(), &g, &f, &at, &cfg.quadrature)?;
        let err = probes.iter().zip(&exact).map(|(p, e)| (sol.value_at(p) - e.u).abs()).fold(0.0, f64::max);
        summary.push_str(&format!("; L_inf vs kernel at {} probes {err:.6e}", probes.len()));
    }
    Ok(summary)
}

pub fn oracle_walk_cmd<W: Write>(cfg: &RunConfig, exec: Execution, seed: Option<u64>, out: W) -> Result<String, Failure> {
    let g = cfg.graph()?;
    let sec = cfg.section("oracle_walk", &cfg.oracle_walk)?;
    let start = sec.start.resolve(&g)?;
    let wc = WalkConfig { step: sec.step, n_paths: sec.n_paths, seed: seed.unwrap_or(sec.seed) };
    let cmp = walk_compare(exec, &g, &start, sec.t, &wc, sec.bins, &cfg.quadrature)?;
    let ends = starheat::oracles::walk_simulate_with(exec, &g, &start, sec.t, &wc)?;
    write_walk_csv(&ends, out).map_err(io)?;
    Ok(format!(
        "oracle-walk: {} paths, seed {}; edge frequencies {:?}; expected {:?}; max |z| {:.3} (bins), {:.3} (edges)",
        cmp.n_paths, wc.seed, cmp.edge_frequency, cmp.edge_expected, cmp.max_abs_z, cmp.max_edge_z
    ))
}

pub fn examples_cmd<W: Write>(cfg: &RunConfig, out: W) -> Result<String, Failure> {
    let sec = cfg.section("examples", &cfg.examples)?;
    let g = StarGraph::uniform(3)?;
    let ex1 = GraphFunction::from_atoms(&[(0, 1.0, 1.0), (1, 1.0, 1.0), (2, 1.0, 1.0)])?;
    let ex2 = GraphFunction::from_atoms(&[(2, 1.0, 1.0)])?;
    let mut w = CsvWriter::new(out, &["example", "edge", "x", "t", "quantity", "pipeline", "closed_form", "abs_diff"])
        .map_err(io)?;
    let mut worst = 0.0f64;
    let mut rows = 0usize;
    for &x in &sec.x.values() {
        for &t in &sec.t.values() {
            for edge in 0..3 {
                let p = g.point(edge, x)?;
                let v1 = apply(&g, &ex1, &p, t, &cfg.quadrature)?;
                let v2 = apply(&g, &ex2, &p, t, &cfg.quadrature)?;
                let cases = [
                    (1usize, "u", v1.u, example1_u(x, t)?),
                    (1, "lhs", v1.log_xx()?, example1_lhs(x, t)?),
                    (2, "u", v2.u, example2_u(edge, x, t)?),
                    (2, "lhs", v2.log_xx()?, example2_lhs(edge, x, t)?),
                ];
                for (ex, quantity, pipeline, closed) in cases {
                    let diff = (pipeline - closed).abs();
                    worst = worst.max(diff);
                    rows += 1;
                    w.row(&[ex.into(), (edge + 1).into(), x.into(), t.into(), quantity.into(), pipeline.into(), closed.into(), diff.into()])
                        .map_err(io)?;
                }
            }
        }
    }
    w.finish().map_err(io)?;
    Ok(format!("examples: {rows} rows; max abs_diff {worst:.3e}"))
}
