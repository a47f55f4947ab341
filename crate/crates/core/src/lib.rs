//! Most probable transition paths and transition times for scalar SDEs
//! with additive noise.
//!
//! Given `dX_t = b(X_t) dt + c dB_t` on a bounded domain with absorbing
//! boundary and two metastable states `x0`, `xf`, this crate provides:
//!
//! - sample-path simulation with reproducible parallel ensembles and
//!   first-transition statistics ([`simulate`]);
//! - the Brownian tube-probability series, empirical tube probabilities,
//!   mean-exit-time solvers, and the analytic bound machinery ([`tube`]);
//! - Onsager-Machlup, kappa-generalized, modified, and Freidlin-Wentzell
//!   action functionals on gridded paths ([`action`]);
//! - the Euler-Lagrange boundary-value problem by shooting, with energy
//!   diagnostics and a direct-minimization oracle ([`variational`]);
//! - transition-time estimation by modified-action minimization, the
//!   energy-shell equation, closed forms, and rigorous two-sided bounds
//!   ([`mptt`]);
//! - a reproducible double-well experiment harness with CSV/SVG outputs
//!   ([`harness`]).
//!
//! The narrative guide lives in `book/`; its code blocks compile and run as
//! doc-tests of this crate, so the book cannot drift from the API.
//!
//! # Quick start
//!
//! ```
//! use omt_core::model::{DriftModel, SdeSystem};
//! use omt_core::mptt::brownian_mptt;
//!
//! // zero drift: the transition time has a closed form
//! let sys = SdeSystem::new(DriftModel::brownian(), 1.0, 5.0, 0.0, 1.0, 0.5)?;
//! let t = brownian_mptt(sys.x0, sys.xf, 0.5, sys.c);
//! assert!((t - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
//! # Ok::<(), omt_core::Error>(())
//! ```

pub mod action;
pub mod error;
pub mod harness;
pub mod model;
pub mod mptt;
pub mod numerics;
pub mod poly;
pub mod simulate;
pub mod tube;
pub mod variational;

pub use error::{Error, Result};
pub use model::{DriftModel, DriftSpec, SdeSystem, TubeSpec};
pub use simulate::{Path, SimConfig};

// The book's chapters double as doc-tests so the guide stays in sync with
// the crate. Each module below carries one chapter as its documentation.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/tube.md")]
    mod tube {}
    #[doc = include_str!("../../../book/src/action.md")]
    mod action {}
    #[doc = include_str!("../../../book/src/shooting.md")]
    mod shooting {}
    #[doc = include_str!("../../../book/src/transition-time.md")]
    mod transition_time {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    mod experiment {}
}
