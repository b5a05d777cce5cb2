//! The Li-Yau estimate with its correction term, and the Harnack machinery
//! derived from it.

mod harnack;
mod liyau;

pub use harnack::{
    harnack_constant, harnack_constant_bound, harnack_constant_detail, harnack_report, harnack_rhs, path_point, rho,
    HarnackConstant, HarnackReport, DEFAULT_R_GRID,
};
pub use liyau::{curvature_term, curvature_term_exact, h_factor, liyau_report, liyau_scan, LiYauReport};

/// Margins below this are treated as violations (after one re-run at a
/// tighter quadrature tolerance).
pub const MARGIN_TOL: f64 = 1e-8;
