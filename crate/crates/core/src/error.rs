use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {name} = {value}: every dimension must be at least 1")]
    InvalidDimension { name: &'static str, value: u64 },

    #[error("dimension product {d_a} x {d_b} x {d_e} overflows u64")]
    DimensionOverflow { d_a: u64, d_b: u64, d_e: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series term k = {k} is not finite")]
    SeriesOverflow { k: usize },

    #[error("quadrature did not converge after {evaluations} evaluations (last change {last_change:e})")]
    NonConvergence { evaluations: usize, last_change: f64 },

    #[error("dimensions ({d_a},{d_b},{d_e}) are outside the factorised regime d_A*d_B <= d_E")]
    Regime { d_a: u64, d_b: u64, d_e: u64 },

    #[error("partial fractions need four distinct poles, got {poles:?}")]
    DegeneratePoles { poles: [u64; 4] },

    #[error("total dimension {n} exceeds the Monte Carlo cap {cap}")]
    Resource { n: u64, cap: u64 },

    #[error("density matrix eigenvalue {0:e} is below the -1e-10 validity floor")]
    NegativeEigenvalue(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Monte Carlo run aborted at sample {index}: {source}")]
    OracleAborted {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
