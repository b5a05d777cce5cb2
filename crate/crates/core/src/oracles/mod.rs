//! Independent references for the kernel pipeline: closed-form examples, a
//! Crank-Nicolson solver on a truncated star, and a random walk.

pub mod closed_form;
pub mod fd;
pub mod walk;

pub use closed_form::{example1_lhs, example1_u, example2_lhs, example2_u};
pub use fd::{fd_solve, FdConfig, FdSolution};
pub use walk::{walk_compare, walk_simulate, walk_simulate_with, write_walk_csv, BinStat, WalkComparison, WalkConfig};
