//! Most probable transition time: closed forms, modified-action
//! minimization, the energy-shell equation, and two-sided bounds.
//!
//! The transition time is the `T` achieving the double optimization of the
//! tube probability over paths and durations. Through the tube
//! approximation this becomes the minimization over `T` of
//!
//! ```text
//! S_mOM(T) = S_OM(psi_T) + pi^2 c^4 T / (8 delta^2)
//! ```
//!
//! whose stationarity condition is `E(T) = pi^2 c^4 / (8 delta^2)` by the
//! Hamilton-Jacobi relation `dS_OM/dT = -E(T)`. For zero drift everything
//! collapses to the closed form `T = 2 delta |xf - x0| / (pi c^2)`.

use crate::action::tube_penalty_rate;
use crate::error::{Error, Result};
use crate::model::{SdeSystem, TubeSpec};
use crate::numerics::{bisect, golden_section_min};
use crate::simulate::SimConfig;
use crate::tube::{lower_bound_constants, mean_exit_time_bvp, theta_max};
use crate::variational::{energy_of_time, energy_profile, solve_mptp};

/// How a transition-time estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionTimeMethod {
    ClosedForm,
    ActionMinimization,
    EnergyShell,
}

/// A transition-time estimate with its certificates.
#[derive(Debug, Clone)]
pub struct TransitionTimeResult {
    pub t_star: f64,
    pub method: TransitionTimeMethod,
    /// Modified OM action at `t_star` (NaN for methods that do not evaluate it).
    pub s_mom_at_t: f64,
    /// `(rho, T_upper)` when bounds were computed alongside.
    pub bounds: Option<(f64, f64)>,
    /// Whether `pi^2 c^4 / (8 delta^2)` exceeded every observed `E(T)`.
    pub condition_ok: Option<bool>,
}

/// Closed-form transition time for zero drift:
/// `T = 2 delta |xf - x0| / (pi c^2)`.
pub fn brownian_mptt(x0: f64, xf: f64, delta: f64, c: f64) -> f64 {
    2.0 * delta * (xf - x0).abs() / (std::f64::consts::PI * c * c)
}

/// Minimize `T -> S_mOM(psi_T)` over the bracket by a 32-point coarse scan
/// (logarithmically spaced, so minima near either end of a wide bracket are
/// still localized, and unsolvable subranges drop out) followed by
/// golden-section refinement to `tol`.
pub fn minimize_modified_action(
    system: &SdeSystem,
    delta: f64,
    t_bracket: (f64, f64),
    tol: f64,
) -> Result<TransitionTimeResult> {
    let (t_lo, t_hi) = t_bracket;
    if !(t_lo > 0.0 && t_hi > t_lo && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad bracket or tolerance: [{t_lo}, {t_hi}], tol = {tol}"
        )));
    }
    let rate = tube_penalty_rate(system.c, delta);
    let shoot_tol = 1e-9;
    let s_mom = |t: f64| -> Option<f64> {
        solve_mptp(system, t, shoot_tol)
            .ok()
            .map(|sol| sol.om_action.total + rate * t)
    };

    // coarse scan; unsolvable T's drop out here
    const N_SCAN: usize = 32;
    let log_lo = t_lo.ln();
    let log_step = (t_hi.ln() - log_lo) / N_SCAN as f64;
    let mut ts = Vec::with_capacity(N_SCAN + 1);
    let mut vs = Vec::with_capacity(N_SCAN + 1);
    for i in 0..=N_SCAN {
        let t = (log_lo + i as f64 * log_step).exp();
        if let Some(v) = s_mom(t) {
            ts.push(t);
            vs.push(v);
        }
    }
    if ts.len() < 3 {
        return Err(Error::NoBracket {
            v_max: f64::NAN,
            n_scan: N_SCAN + 1,
        });
    }
    let mut best = 0;
    for (i, &v) in vs.iter().enumerate() {
        if v < vs[best] {
            best = i;
        }
    }
    if best == 0 || best == ts.len() - 1 {
        let direction = if best == 0 { "decreasing toward the left edge" } else { "decreasing toward the right edge" };
        return Err(Error::NoInteriorMinimum {
            lo: t_lo,
            hi: t_hi,
            direction,
        });
    }

    let (bracket_lo, bracket_hi) = (ts[best - 1], ts[best + 1]);
    let (t_star, s_at) = golden_section_min(
        |t| s_mom(t).unwrap_or(f64::INFINITY),
        bracket_lo,
        bracket_hi,
        tol,
        300,
    );
    Ok(TransitionTimeResult {
        t_star,
        method: TransitionTimeMethod::ActionMinimization,
        s_mom_at_t: s_at,
        bounds: None,
        condition_ok: None,
    })
}

/// Solve `E(T) = pi^2 c^4 / (8 delta^2)` for T by bisection, assuming the
/// energy is monotone across the bracket. Refuses to guess when the target
/// is not bracketed.
pub fn energy_shell_time(system: &SdeSystem, delta: f64, t_bracket: (f64, f64)) -> Result<f64> {
    let (t_lo, t_hi) = t_bracket;
    let target = tube_penalty_rate(system.c, delta);
    let shoot_tol = 1e-9;
    let e_lo = energy_of_time(system, t_lo, shoot_tol)?;
    let e_hi = energy_of_time(system, t_hi, shoot_tol)?;
    let f_lo = e_lo - target;
    let f_hi = e_hi - target;
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoSignChange {
            lo: t_lo,
            hi: t_hi,
            f_lo,
            f_hi,
        });
    }
    let root = bisect(
        |t| energy_of_time(system, t, shoot_tol).map(|e| e - target).unwrap_or(f64::NAN),
        t_lo,
        t_hi,
        1e-10 * (t_hi - t_lo).abs(),
    );
    // verify the relative residual rather than trusting the bracket width
    let e_root = energy_of_time(system, root, shoot_tol)?;
    if ((e_root - target) / target).abs() > 1e-4 {
        return Err(Error::NoSignChange {
            lo: t_lo,
            hi: t_hi,
            f_lo: e_root - target,
            f_hi: e_root - target,
        });
    }
    Ok(root)
}

/// Two-sided bounds `(rho, T_upper)` on the most probable transition time.
///
/// The upper bound instantiates the power-law tail with the Markov
/// inequality: `T_upper = E[tau_{D*}] / max_t Theta(t)` where `D*` has
/// half-width `l + delta`. The lower bound comes from the small-time
/// Gaussian reachability estimate
///
/// ```text
/// g(t) = (2 delta / sqrt(2 pi c^2 t)) exp(-(|xf-x0| - delta - t sup_D|b|)^2 / (2 c^2 t))
/// ```
///
/// `rho` is the first up-crossing of `g` through `max Theta`; below `rho`
/// no time can carry the supremum. A degenerate `rho = 0` (no crossing
/// found) is allowed and simply means the small-time argument gives no
/// information for these parameters.
pub fn transition_time_bounds(
    system: &SdeSystem,
    delta: f64,
    _config: &SimConfig,
) -> Result<(f64, f64)> {
    let tube = TubeSpec::new(delta, system)?;
    let constants = lower_bound_constants(system, tube);
    let (_, theta_peak) = theta_max(&constants, system.c, delta);
    if !(theta_peak > 0.0) {
        return Err(Error::QuadratureFailure { tol: f64::NAN });
    }
    let mean_exit = mean_exit_time_bvp(system, system.l + delta, system.x0)?;
    let t_upper = mean_exit / theta_peak;

    let sup_b = system.sup_abs_drift_on_domain();
    let c2 = system.c * system.c;
    let gap = (system.xf - system.x0).abs() - delta;
    let g = |t: f64| -> f64 {
        let d = (gap - t * sup_b).max(0.0);
        let prefactor = 2.0 * delta / (2.0 * std::f64::consts::PI * c2 * t).sqrt();
        (prefactor * (-d * d / (2.0 * c2 * t)).exp()).min(1.0)
    };

    // march a log grid for the first up-crossing of theta_peak, then bisect
    let mut rho = 0.0;
    let t_min: f64 = 1e-10;
    let t_max = t_upper.min(1e6).max(1.0);
    let n = 400;
    let log_lo = t_min.ln();
    let log_step = (t_max.ln() - log_lo) / n as f64;
    let mut prev_t = t_min;
    let mut prev_below = g(t_min) < theta_peak;
    if prev_below {
        for i in 1..=n {
            let t = (log_lo + i as f64 * log_step).exp();
            let below = g(t) < theta_peak;
            if !below {
                rho = bisect(|t| g(t) - theta_peak, prev_t, t, 1e-12 * t);
                break;
            }
            prev_t = t;
            prev_below = below;
        }
        let _ = prev_below;
    }
    Ok((rho, t_upper))
}

/// True when the penalty level `pi^2 c^4 / (8 delta^2)` exceeds the maximum
/// observed energy over the grid; also returns the margin (level minus max).
pub fn condition_check(system: &SdeSystem, delta: f64, t_grid: &[f64]) -> Result<(bool, f64)> {
    let level = tube_penalty_rate(system.c, delta);
    let mut max_e = f64::NEG_INFINITY;
    for &t in t_grid {
        let sol = solve_mptp(system, t, 1e-9)?;
        let (e, _) = energy_profile(&sol, system);
        max_e = max_e.max(e);
    }
    Ok((level > max_e, level - max_e))
}
