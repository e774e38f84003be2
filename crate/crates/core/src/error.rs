use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("momentum k = {0} lies outside [-pi, pi]")]
    MomentumOutOfRange(f64),

    #[error("momentum k = {0} sits on a band edge where the scattering mode is degenerate")]
    BandEdge(f64),

    #[error("energy {0} is a pole of the Green function")]
    Pole(Complex64),

    #[error("energy {0} is a branch point of the band")]
    BranchPoint(Complex64),

    #[error("energy {0} lies on the branch cut; use an on-cut energy with a side")]
    OnBranchCut(Complex64),

    #[error("on-cut energy {0} lies outside the band")]
    OffBand(f64),

    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    #[error(
        "quadrature did not reach tolerance {tolerance:e}: estimate {estimate} \
         with error {error:e} after {panels} panels"
    )]
    Quadrature {
        estimate: Complex64,
        error: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error("Bessel J_{order}({x}) lies outside the supported envelope")]
    BesselRange { order: usize, x: f64 },

    #[error("Bessel series not converged at n_max = {n_max}: last change {change:e}")]
    SeriesDivergence { n_max: usize, change: f64 },

    #[error("averaging window spans {periods:.2} periods; at least {required} are needed")]
    InsufficientWindow { periods: f64, required: usize },

    #[error("level {eps_c} is unreachable; the metric saturates at 1/2")]
    Unreachable { eps_c: f64 },

    #[error("invalid lattice size N = {0}: must be even and within [4, 16384]")]
    LatticeSize(usize),

    #[error("site {x} is outside the ring of {n} cavities")]
    SiteOutOfRange { x: i64, n: usize },

    #[error(
        "time {t_max} exceeds the wrap limit {limit} of the ring; \
         the wavefront would reach the antipode"
    )]
    WrapViolation { t_max: f64, limit: f64 },

    #[error("symmetric eigensolver failed to converge")]
    EigenFailure,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
