//! Tube probabilities, mean exit times, and the analytic bound machinery.
//!
//! The probability that a scaled Brownian motion stays inside the symmetric
//! tube of radius `delta` over `[0, T]` has the eigenfunction series
//!
//! ```text
//! P(c, delta, T) = sum_{n>=0} (-1)^n 4/((2n+1) pi) exp(-(2n+1)^2 pi^2 c^2 T / (8 delta^2))
//! ```
//!
//! This module evaluates the series and its two-term truncation `mu1`, checks
//! it against Monte Carlo, solves the mean-exit-time boundary-value problem
//! for general drift, and assembles the constants of the exponential lower
//! bound and power-law upper bound for the supremum tube probability.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{SdeSystem, TubeSpec};
use crate::numerics::{adaptive_simpson, golden_section_max, log_sum_exp};
use crate::poly::{max_on_interval, sup_on_interval};
use crate::simulate::{mix64, step, Path, SimConfig, SplitMix64};

/// Constants entering the tube-probability bounds.
///
/// `h0`, `h1`, `h2` are suprema of drift expressions over the tube region;
/// `c0`, `c1` are the raw lower-bound prefactors; `k0`, `k1`, `k2` are the
/// constants of the rewritten lower bound
/// `k0 exp(-k1/T - k2 T + ln mu1(T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub c0: f64,
    pub c1: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Term cap for the alternating series. The exponential factor makes the
/// series short for any T of practical size; the cap only matters for
/// T below ~1e-10 where the partial sum still carries the first-omitted-term
/// error bound of roughly 1e-7.
const MAX_SERIES_TERMS: usize = 5_000_000;

/// Brownian tube-probability series, truncated when the next term falls
/// below `tol` (alternating series, so the truncation error is below the
/// first omitted term). Clamped to [0, 1]. `T = 0` returns 1 exactly.
pub fn brownian_tube_probability(c: f64, delta: f64, t: f64, tol: f64) -> f64 {
    debug_assert!(c > 0.0 && delta > 0.0 && t >= 0.0 && tol > 0.0);
    if t == 0.0 {
        return 1.0;
    }
    let a = std::f64::consts::PI.powi(2) * c * c * t / (8.0 * delta * delta);
    let mut sum = 0.0;
    for n in 0..MAX_SERIES_TERMS {
        let m = (2 * n + 1) as f64;
        let term = 4.0 / (m * std::f64::consts::PI) * (-m * m * a).exp();
        if term < tol {
            break;
        }
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-term truncation of the series (the n = 0 and n = 1 terms), used
/// inside the lower-bound function `Theta`.
pub fn mu1(c: f64, delta: f64, t: f64) -> f64 {
    let a = std::f64::consts::PI.powi(2) * c * c * t / (8.0 * delta * delta);
    4.0 / std::f64::consts::PI * (-a).exp()
        - 4.0 / (3.0 * std::f64::consts::PI) * (-9.0 * a).exp()
}

/// One-term asymptote `(4/pi) exp(-pi^2 c^2 T / (8 delta^2))`.
pub fn one_term_asymptote(c: f64, delta: f64, t: f64) -> f64 {
    let a = std::f64::consts::PI.powi(2) * c * c * t / (8.0 * delta * delta);
    4.0 / std::f64::consts::PI * (-a).exp()
}

/// Monte Carlo estimate of the probability that the SDE stays within
/// `delta` of the reference path `psi` at every grid point of the
/// simulation, with a 99% normal-approximation confidence half-width.
///
/// `psi.dt` must be an integer multiple of `config.dt`; the reference is
/// linearly interpolated onto the simulation grid. Paths are *not* absorbed
/// at the domain boundary here: leaving the tube is already failure, and
/// tubes of interest lie inside D.
pub fn empirical_tube_probability(
    system: &SdeSystem,
    psi: &Path,
    delta: f64,
    config: &SimConfig,
    n: u64,
) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tube radius must be positive, got {delta}"
        )));
    }
    config.validate()?;
    if (psi.values[0] - system.x0).abs() >= delta {
        return Err(Error::InvalidParameter(format!(
            "reference path starts at {} which is not within delta = {delta} of x0 = {}",
            psi.values[0], system.x0
        )));
    }
    let ratio = psi.dt / config.dt;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.abs() || ratio < 1.0 - 1e-12 {
        return Err(Error::IncompatibleGrids(format!(
            "psi.dt = {} is not an integer multiple of config.dt = {}",
            psi.dt, config.dt
        )));
    }
    let duration = psi.duration();
    let n_steps = (duration / config.dt).round() as usize;
    // reference values on the simulation grid
    let reference: Vec<f64> = (0..=n_steps)
        .map(|i| psi.value_at(i as f64 * config.dt))
        .collect();

    let survived: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::new(mix64(config.seed, i));
            let scale = system.c * config.dt.sqrt();
            let mut x = system.x0;
            if (x - reference[0]).abs() >= delta {
                return 0u64;
            }
            for r in reference.iter().skip(1) {
                let xi: f64 = StandardNormal.sample(&mut rng);
                x = match step(system, x, scale * xi, config) {
                    Ok(v) => v,
                    Err(_) => return 0,
                };
                if (x - r).abs() >= delta {
                    return 0;
                }
            }
            1
        })
        .sum();

    let p = survived as f64 / n as f64;
    let ci = 2.575_829_303_548_901 * (p * (1.0 - p) / n as f64).sqrt();
    Ok((p, ci))
}

// ---------------------------------------------------------------------------
// Mean exit time boundary-value problem
// ---------------------------------------------------------------------------

/// Mean exit time `u(x_eval)` of the diffusion from the interval of the given
/// half-width around `x0`, solving `(c^2/2) u'' + b u' = -1` with zero
/// boundary data by the integrating-factor double quadrature.
///
/// With the scale density `s(y) = exp(-2 U(y) / c^2)` (U the antiderivative
/// of b from x0) and `p = 1/s`, the solution is
///
/// ```text
/// u(x) = (2/c^2) [ (S(b)-S(x)) I1 + (S(x)-S(a)) I2 ] / (S(b)-S(a))
/// I1 = int_a^x (S(y)-S(a)) p(y) dy,   I2 = int_x^b (S(b)-S(y)) p(y) dy
/// ```
///
/// Every scale-function difference is evaluated as its own quadrature (never
/// as a literal difference) and the pieces combine in log space, so steep
/// potentials with scale factors far beyond 1e308 still evaluate. Bistable
/// drifts over wide domains routinely produce exit times like 1e80; they are
/// returned as ordinary (finite) f64 values.
pub fn mean_exit_time_bvp(system: &SdeSystem, halfwidth: f64, x_eval: f64) -> Result<f64> {
    const REL_TOL: f64 = 1e-8;
    if !(halfwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "halfwidth must be positive, got {halfwidth}"
        )));
    }
    let (a, b) = (system.x0 - halfwidth, system.x0 + halfwidth);
    if !(a < x_eval && x_eval < b) {
        return Err(Error::InvalidParameter(format!(
            "x_eval = {x_eval} must lie inside ({a}, {b})"
        )));
    }
    let c2 = system.c * system.c;
    let ln_s = |y: f64| -2.0 * system.u_of(y) / c2;
    let ln_p = |y: f64| 2.0 * system.u_of(y) / c2;

    // Exact maxima of +-U on subintervals via the antiderivative polynomial:
    // d/dy ln_s = -2 b / c^2, so extrema of ln_s sit at roots of b.
    let anti = system.drift.b_poly().antiderivative();
    let max_ln_s = |lo: f64, hi: f64| -> f64 {
        let m = max_on_interval(&anti.scale(-1.0), lo, hi, 2048);
        2.0 * (m + anti.eval(system.x0)) / c2
    };
    let max_ln_p = |lo: f64, hi: f64| -> f64 {
        let m = max_on_interval(&anti, lo, hi, 2048);
        2.0 * (m - anti.eval(system.x0)) / c2
    };

    let x = x_eval;
    let ml = max_ln_s(a, x);
    let mr = max_ln_s(x, b);
    let mp_l = max_ln_p(a, x);
    let mp_r = max_ln_p(x, b);

    // scaled scale-function increments, each a direct positive integral
    let s_left = adaptive_simpson(&|y| (ln_s(y) - ml).exp(), a, x, REL_TOL)?;
    let s_right = adaptive_simpson(&|y| (ln_s(y) - mr).exp(), x, b, REL_TOL)?;

    // I1 with (S(y)-S(a)) computed as its own inner quadrature
    let inner_tol = REL_TOL * 0.1;
    let i1 = adaptive_simpson(
        &|y| {
            let inner = adaptive_simpson(&|z| (ln_s(z) - ml).exp(), a, y, inner_tol)
                .unwrap_or(f64::NAN);
            inner * (ln_p(y) - mp_l).exp()
        },
        a,
        x,
        REL_TOL,
    )?;
    let i2 = adaptive_simpson(
        &|y| {
            let inner = adaptive_simpson(&|z| (ln_s(z) - mr).exp(), y, b, inner_tol)
                .unwrap_or(f64::NAN);
            inner * (ln_p(y) - mp_r).exp()
        },
        x,
        b,
        REL_TOL,
    )?;
    if !(i1.is_finite() && i2.is_finite() && s_left.is_finite() && s_right.is_finite()) {
        return Err(Error::QuadratureFailure { tol: REL_TOL });
    }

    // u = (2/c^2) [ e^{mr}Sr * e^{ml+mp_l}I1 + e^{ml}Sl * e^{mr+mp_r}I2 ] / (e^{ml}Sl + e^{mr}Sr)
    let ln_term1 = mr + s_right.max(0.0).ln() + ml + mp_l + i1.max(0.0).ln();
    let ln_term2 = ml + s_left.max(0.0).ln() + mr + mp_r + i2.max(0.0).ln();
    let ln_den = log_sum_exp(ml + s_left.max(0.0).ln(), mr + s_right.max(0.0).ln());
    let ln_u = (2.0 / c2).ln() + log_sum_exp(ln_term1, ln_term2) - ln_den;
    let u = ln_u.exp();
    if !u.is_finite() {
        return Err(Error::QuadratureFailure { tol: REL_TOL });
    }
    Ok(u)
}

/// Markov bound on the supremum tube probability: `P(tau > T) <= E[tau]/T`,
/// clamped to 1. Valid for every positive `T`.
pub fn markov_upper_bound(mean_exit_enlarged: f64, t: f64) -> f64 {
    debug_assert!(mean_exit_enlarged > 0.0 && t > 0.0);
    (mean_exit_enlarged / t).min(1.0)
}

/// Suprema of drift expressions over the tube region around a path:
/// `h0` over the ball of radius delta at `xf`, `h1 = sup |b b'|` and
/// `h2 = sup |b''|` over the interval hull of the path inflated by delta.
pub fn tube_region_constants(system: &SdeSystem, psi: &Path, delta: f64) -> BoundConstants {
    let (lo, hi) = psi
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let region = (lo - delta, hi + delta);

    // h0 = sup_{|x - xf| < delta} |U(x) - U(xf)| with U exact
    let anti = system.drift.b_poly().antiderivative();
    let mut centered = anti.clone();
    // |U(x) - U(xf)| = |anti(x) - anti(xf)| since the x0 reference cancels
    let shift = anti.eval(system.xf);
    let coeffs = {
        let mut c = centered.coeffs().to_vec();
        c[0] -= shift;
        c
    };
    centered = crate::poly::Poly::new(coeffs).expect("degree bounded by construction");
    let h0 = sup_on_interval(&centered, system.xf - delta, system.xf + delta, 2048);

    let bbp = system.drift.b_poly().mul(system.drift.db_poly());
    let h1 = sup_on_interval(&bbp, region.0, region.1, 2048);
    let h2 = sup_on_interval(system.drift.d2b_poly(), region.0, region.1, 2048);

    BoundConstants {
        h0,
        h1,
        h2,
        c0: 0.0,
        c1: 0.0,
        k0: 0.0,
        k1: 0.0,
        k2: 0.0,
    }
}

/// Full lower-bound constants for the straight-line family `phi_T`.
///
/// With `phi_1(t) = x0 + (xf - x0) t` on [0, 1]:
///
/// ```text
/// c0 = exp(-h0 / c^2)
/// c1 = (h1 + kappa c^2 h2) delta / c^2
/// k0 = c0 exp((xf - x0)/c^2 * int_0^1 b(phi_1) dt)
/// k1 = ((xf - x0)^2 + 2 |xf - x0| delta) / (2 c^2)
/// k2 = (1/2) int_0^1 b^2(phi_1) dt / c^2 + c1
/// ```
///
/// The line integrals are exact polynomial integrals.
pub fn lower_bound_constants(system: &SdeSystem, tube: TubeSpec) -> BoundConstants {
    let delta = tube.delta;
    let c2 = system.c * system.c;
    let line = Path::line(system.x0, system.xf, 1.0, 256).expect("static line");
    let base = tube_region_constants(system, &line, delta);

    let c0 = (-base.h0 / c2).exp();
    let c1 = (base.h1 + system.kappa * c2 * base.h2) * delta / c2;

    let dx = system.xf - system.x0;
    // int_0^1 b(phi_1) dt = (U(xf) - U(x0)) / (xf - x0), exact
    let int_b = system.u_of(system.xf) / dx;
    // int_0^1 b^2(phi_1) dt = (1/(xf-x0)) int_{x0}^{xf} b^2, exact
    let b2 = system.drift.b_poly().mul(system.drift.b_poly());
    let int_b2 = b2.integrate(system.x0, system.xf) / dx;

    let k0 = c0 * (dx / c2 * int_b).exp();
    let k1 = (dx * dx + 2.0 * dx.abs() * delta) / (2.0 * c2);
    let k2 = 0.5 * int_b2 / c2 + c1;

    BoundConstants {
        c0,
        c1,
        k0,
        k1,
        k2,
        ..base
    }
}

/// The lower-bound function `Theta(t) = k0 exp(-k1/t - k2 t) mu1(t)`.
/// Underflows cleanly to 0 for tiny or huge `t`.
pub fn theta_bound(t: f64, constants: &BoundConstants, c: f64, delta: f64) -> f64 {
    debug_assert!(t > 0.0);
    let m = mu1(c, delta, t);
    if m <= 0.0 {
        return 0.0;
    }
    let ln_theta = constants.k0.ln() - constants.k1 / t - constants.k2 * t + m.ln();
    ln_theta.exp()
}

/// Maximize `Theta` over t. A coarse logarithmic scan localizes the maximum
/// (guarding against multimodality), then golden-section refines it.
/// Returns `(t_peak, theta_peak)`.
pub fn theta_max(constants: &BoundConstants, c: f64, delta: f64) -> (f64, f64) {
    let f = |t: f64| theta_bound(t, constants, c, delta);
    let (lo, hi) = (1e-4f64, 1e3f64);
    let n = 200;
    let log_lo = lo.ln();
    let log_step = (hi.ln() - log_lo) / n as f64;
    let mut best_i: usize = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let t = (log_lo + i as f64 * log_step).exp();
        let v = f(t);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let bracket_lo = (log_lo + (best_i.saturating_sub(1)) as f64 * log_step).exp();
    let bracket_hi = (log_lo + ((best_i + 1).min(n)) as f64 * log_step).exp();
    golden_section_max(f, bracket_lo, bracket_hi, 1e-10, 200)
}
