//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation
    /// (evaluation of a Laurent loop with negative exponents at 0,
    /// scaling by 0, non-polynomial input where a polynomial is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A loop that must be unitary on the unit circle is not.
    #[error("loop is not unitary on the circle (defect {defect:.3e}, tolerance {tol:.3e})")]
    NotUnitary { defect: f64, tol: f64 },

    /// A numerical rank decision fell in an ambiguous band or contradicts
    /// an exact dimension count.
    #[error("rank tolerance failure: {0}")]
    RankTolerance(String),

    /// The Gram matrix of a transformed basis is numerically singular.
    #[error("Gram matrix numerically singular (relative determinant {rel_det:.3e})")]
    GramSingular { rel_det: f64 },

    /// A factorization failed an internal consistency cross-check.
    #[error("factorization inconsistency: {0}")]
    Inconsistent(String),

    /// A pointwise frame lost rank somewhere on the grid.
    #[error("rank drop at grid point ({ix},{iy}), z = {z}: {msg}")]
    RankDrop {
        ix: usize,
        iy: usize,
        z: String,
        msg: String,
    },

    /// Eigenvalues of the rotation generator are not near integers,
    /// or the exponents differ between grid points.
    #[error("S^1 spectrum fit failed (max fit error {max_err:.3e})")]
    SpectrumFit { max_err: f64 },

    /// Expression syntax error.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Malformed or inconsistent experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code classification: 2 for bad input, 1 for everything
    /// else that stops a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
