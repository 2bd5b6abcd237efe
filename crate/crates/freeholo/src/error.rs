//! Crate-wide error type and exit-code classification.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("singular to tolerance: reciprocal condition {rcond:.3e} below floor {floor:.3e}")]
    Singular { rcond: f64, floor: f64 },

    #[error("matrix is not hermitian: relative asymmetry {asym:.3e} exceeds {tol:.3e}")]
    NotHermitian { asym: f64, tol: f64 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("point outside domain: norm of delta(x) is {norm:.6} (needs < {bound:.6})")]
    OutsideDomain { norm: f64, bound: f64 },

    #[error("neumann series divergent: q = {q:.6} >= 1")]
    Divergent { q: f64 },

    #[error("sampler gave up after {attempts} attempts")]
    SamplerExhausted { attempts: usize },

    #[error("block tuple leaves domain (norm {norm:.6}); retry with eps <= {suggested_eps:.3e}")]
    BlockOutsideDomain { norm: f64, suggested_eps: f64 },

    #[error("re-centering failed: spectral radius bound {norm:.6} >= 1")]
    Recenter { norm: f64 },

    #[error("term budget of {budget} exceeded at degree {degree}")]
    TermBudget { budget: usize, degree: usize },

    #[error("no admissible evaluation radius on the scaling ray")]
    NoAdmissibleRadius,

    #[error("no certified radius r > 1 at point index {point}")]
    NoCertifiedRadius { point: usize },

    #[error("impossible colligation shape: 1 + ell*J = {cols_out} < 1 + ell*I = {cols_in}")]
    ColligationShape { cols_out: usize, cols_in: usize },

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code class for the CLI contract:
    /// 1 usage/fixture, 2 domain, 3 numerical. Shape mismatches surface
    /// through the CLI only when fixtures disagree, hence class 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Fixture(_) | Error::Usage(_) | Error::Dim(_) => 1,
            Error::OutsideDomain { .. }
            | Error::BlockOutsideDomain { .. }
            | Error::SamplerExhausted { .. }
            | Error::NoAdmissibleRadius
            | Error::NoCertifiedRadius { .. } => 2,
            _ => 3,
        }
    }
}
