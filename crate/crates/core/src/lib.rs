//! Heat kernel and heat semigroup on a metric star graph with Kirchhoff
//! vertex conditions, with numerical checks of the Li-Yau gradient estimate
//! and the Harnack inequality, and independent oracles (closed forms,
//! Crank-Nicolson finite differences, random walks).

// NaN must fail the range checks, so `!(x > 0.0)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod analysis;
pub mod csv;
pub mod data;
pub mod error;
pub mod exec;
pub mod graph;
pub mod kernel;
pub mod oracles;
pub mod quadrature;
pub mod semigroup;

pub use data::{Atom, Density, GraphFunction, PositivityWitness, Profile};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{distance, in_ball, make_harmonic, validate_graph, GraphPoint, HarmonicFunction, StarGraph};
pub use kernel::{gauss, kernel, kernel_mass, tail_radius, KernelValue};
pub use quadrature::{PanelRule, QuadratureSpec};
pub use semigroup::{apply, log_second_derivative, SemigroupValue};
