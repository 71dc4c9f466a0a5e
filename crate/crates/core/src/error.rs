use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not expansive (min |eigenvalue| = {min_modulus})")]
    NotExpansive { min_modulus: f64 },

    #[error("product did not converge within {max_depth} factors (tail {tail:e} > tol {tol:e})")]
    Convergence { max_depth: usize, tail: f64, tol: f64 },

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
