use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Laguerre index outside the supported range (negative superscripts
    /// must be integers `-k` with `1 <= k <= degree`).
    #[error("invalid Laguerre index: degree {degree}, superscript {superscript}")]
    InvalidIndex { degree: usize, superscript: f64 },

    #[error("{name} = {value} is out of range: {requirement}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error(
        "quadrature rule too small: need radial order >= {radial} and angular order >= {angular} \
         (have {have_radial} x {have_angular})"
    )]
    RuleTooSmall {
        radial: usize,
        angular: usize,
        have_radial: usize,
        have_angular: usize,
    },

    #[error("wrong quadrature rule kind: expected {expected}")]
    WrongRuleKind { expected: &'static str },

    #[error("non-finite integrand value at node {index} ({node})")]
    NonFiniteIntegrand { index: usize, node: String },

    #[error("normalization factor is not positive ({value}) for m = {m}, eps = {eps}, z = {z}")]
    NonPositiveNormalization {
        m: usize,
        eps: f64,
        z: Complex64,
        value: f64,
    },

    #[error(
        "quadrature inadequate: order {order} and {check_order} differ by {deviation:e} \
         (tolerance {tolerance:e})"
    )]
    QuadratureInadequate {
        order: usize,
        check_order: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("invalid sampled function: {0}")]
    InvalidSamples(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid parameters for suite `{suite}`: {message}")]
    InvalidConfig { suite: String, message: String },
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    requirement: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            requirement,
        })
    }
}
