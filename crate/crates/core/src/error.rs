use thiserror::Error;

/// Failures raised by the library. Variants map one-to-one onto the
/// error classes the CLI turns into exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid edge weights: {0}")]
    Weight(String),
    #[error("Kirchhoff balance violated: sum of alpha_i * a_i = {0:e}")]
    Kirchhoff(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("initial datum has no density mass; no positivity witness exists")]
    NoWitness,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Weight(_) | Error::Kirchhoff(_) | Error::Config(_) | Error::Domain(_) | Error::NoWitness
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive and finite, got {t}")))
    }
}
