use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A phase difference is not within tolerance of any multiple of `2π/n`.
    #[error("phase {delta} rad is not within {tol} rad of a multiple of 2π/{n}")]
    NotOnLattice { delta: f64, n: usize, tol: f64 },

    /// An argument lies outside the domain of a function.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A parameter set violates one of its invariants.
    #[error("invalid parameter: {0}")]
    Range(String),

    /// A phase-error model selector does not name a known model.
    #[error("unknown phase-error model `{0}`")]
    ModelUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
