//! Crate-wide error type.
//!
//! Errors split into two families: *validation* errors (bad inputs, rejected
//! before any numerics run) and *numerical* errors (an algorithm failed to
//! converge or left its admissible region). The CLI maps the former to exit
//! code 2 and the latter to exit code 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ----- validation -----
    #[error("non-finite input: {what} = {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("drift is not metastable at {which} = {x}: |b(x)| = {residual:e} exceeds {tol:e}")]
    MetastabilityViolation {
        which: &'static str,
        x: f64,
        residual: f64,
        tol: f64,
    },

    #[error("domain too small: |xf - x0| = {separation} must be < l = {halfwidth}")]
    DomainTooSmall { separation: f64, halfwidth: f64 },

    #[error("noise intensity must be positive, got c = {c}")]
    BadNoise { c: f64 },

    #[error("tube radius must satisfy 0 < delta < |xf - x0|, got delta = {delta} with separation {separation}")]
    BadTube { delta: f64, separation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("path too short: need at least {need} points, got {got}")]
    PathTooShort { need: usize, got: usize },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    // ----- numerical -----
    #[error("implicit step did not converge after {iters} Newton iterations (residual {residual:e})")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("horizon too short: {failed} of {total} paths did not exit before t = {horizon}")]
    HorizonTooShort {
        failed: usize,
        total: usize,
        horizon: f64,
    },

    #[error("adaptive quadrature failed to reach relative tolerance {tol:e}")]
    QuadratureFailure { tol: f64 },

    #[error("shot diverged: |psi| exceeded {bound} at t = {t} (direction {direction})")]
    ShotDiverged { bound: f64, t: f64, direction: f64 },

    #[error("shooting found no bracket: psi(T) - xf has no sign change over v0 in [-{v_max}, {v_max}] ({n_scan} scan points)")]
    NoBracket { v_max: f64, n_scan: usize },

    #[error("minimizer did not converge after {iters} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iters: usize, grad_norm: f64 },

    #[error("no interior minimum in [{lo}, {hi}]: scan is monotone ({direction})")]
    NoInteriorMinimum {
        lo: f64,
        hi: f64,
        direction: &'static str,
    },

    #[error("no sign change of E(T) - target over [{lo}, {hi}] (E({lo}) - target = {f_lo:e}, E({hi}) - target = {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("energy/time reparameterization check failed: T = {expected_t} but path integral gives {integral_t}")]
    ReparamMismatch { expected_t: f64, integral_t: f64 },

    #[error("simulation failed for path {path_index}: {source}")]
    PathFailed {
        path_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors rejected at input validation; false for numerical
    /// failures discovered mid-algorithm. Drives the CLI exit code.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::MetastabilityViolation { .. }
                | Error::DomainTooSmall { .. }
                | Error::BadNoise { .. }
                | Error::BadTube { .. }
                | Error::InvalidParameter(_)
                | Error::PathTooShort { .. }
                | Error::IncompatibleGrids(_)
                | Error::GridMismatch(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
