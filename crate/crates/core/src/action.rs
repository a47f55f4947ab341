//! Action functionals evaluated on gridded paths.
//!
//! The kappa-generalized functional is
//!
//! ```text
//! S_T(psi) = int_0^T (1/2) [ (psi' - b(psi))^2 + 2 kappa c^2 b'(psi) ] dt
//! ```
//!
//! with the Onsager-Machlup functional at `kappa = 1/2`. The modified
//! functional adds the tube penalty `pi^2 c^4 T / (8 delta^2)` coming from
//! the leading term of the Brownian tube-probability series; the
//! Freidlin-Wentzell functional drops the divergence term entirely.
//!
//! Velocities use central differences (second-order one-sided stencils at
//! the ends) and integrals use the trapezoid rule, so both error terms are
//! O(h^2) on C^2 paths.

use crate::error::{Error, Result};
use crate::model::SdeSystem;
use crate::simulate::Path;

/// An action value split into its additive pieces;
/// `total = kinetic_part + divergence_part + tube_penalty` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    pub total: f64,
    /// Trapezoid value of `int (1/2)(psi' - b)^2 dt`.
    pub kinetic_part: f64,
    /// Trapezoid value of `int kappa c^2 b'(psi) dt`.
    pub divergence_part: f64,
    /// `pi^2 c^4 T / (8 delta^2)`, zero unless the modified functional.
    pub tube_penalty: f64,
}

/// Second-order velocity estimates on the uniform grid.
pub(crate) fn velocities(path: &Path) -> Result<Vec<f64>> {
    let n = path.values.len();
    if n < 3 {
        return Err(Error::PathTooShort { need: 3, got: n });
    }
    let v = &path.values;
    let dt = path.dt;
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt));
    for i in 1..n - 1 {
        out.push((v[i + 1] - v[i - 1]) / (2.0 * dt));
    }
    out.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt));
    Ok(out)
}

fn trapezoid(dt: f64, f: impl Fn(usize) -> f64, n: usize) -> f64 {
    let mut sum = 0.5 * (f(0) + f(n - 1));
    for i in 1..n - 1 {
        sum += f(i);
    }
    sum * dt
}

/// The kappa-generalized action.
pub fn kappa_action(psi: &Path, system: &SdeSystem, kappa: f64) -> Result<ActionValue> {
    let vel = velocities(psi)?;
    let n = psi.values.len();
    let c2 = system.c * system.c;
    let kinetic = trapezoid(
        psi.dt,
        |i| {
            let d = vel[i] - system.drift.b(psi.values[i]);
            0.5 * d * d
        },
        n,
    );
    let divergence = trapezoid(psi.dt, |i| kappa * c2 * system.drift.db(psi.values[i]), n);
    Ok(ActionValue {
        total: kinetic + divergence,
        kinetic_part: kinetic,
        divergence_part: divergence,
        tube_penalty: 0.0,
    })
}

/// The Onsager-Machlup action: `kappa_action` at kappa = 1/2.
pub fn om_action(psi: &Path, system: &SdeSystem) -> Result<ActionValue> {
    kappa_action(psi, system, 0.5)
}

/// The modified OM action: OM plus the tube penalty
/// `pi^2 c^4 T / (8 delta^2)` (the constant integrand integrates exactly).
pub fn modified_om_action(psi: &Path, system: &SdeSystem, delta: f64) -> Result<ActionValue> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::BadTube {
            delta,
            separation: (system.xf - system.x0).abs(),
        });
    }
    let om = om_action(psi, system)?;
    let penalty = tube_penalty_rate(system.c, delta) * psi.duration();
    Ok(ActionValue {
        total: om.total + penalty,
        tube_penalty: penalty,
        ..om
    })
}

/// The per-unit-time tube penalty `pi^2 c^4 / (8 delta^2)`.
pub fn tube_penalty_rate(c: f64, delta: f64) -> f64 {
    std::f64::consts::PI.powi(2) * c.powi(4) / (8.0 * delta * delta)
}

/// The Freidlin-Wentzell action `int (psi' - b(psi))^2 dt`, printed without
/// the customary 1/2; the small-noise limit `S_mOM -> (1/2) S_FW` as c -> 0
/// carries the compensating factor.
pub fn fw_action(psi: &Path, system: &SdeSystem) -> Result<f64> {
    let vel = velocities(psi)?;
    let n = psi.values.len();
    Ok(trapezoid(
        psi.dt,
        |i| {
            let d = vel[i] - system.drift.b(psi.values[i]);
            d * d
        },
        n,
    ))
}
