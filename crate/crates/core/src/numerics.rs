//! Small shared numerics: golden-section search, scalar bisection, and
//! adaptive Simpson quadrature.

use crate::error::{Error, Result};

const PHI_COMPLEMENT: f64 = 0.381_966_011_250_105_1; // 2 - golden ratio

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)` once the bracket is narrower than `tol` or the
/// evaluation budget is spent. Assumes `f` is unimodal on the bracket;
/// callers that cannot guarantee unimodality should localize the minimum
/// with a coarse scan first.
pub fn golden_section_min(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_evals: usize,
) -> (f64, f64) {
    let mut x1 = a + PHI_COMPLEMENT * (b - a);
    let mut x2 = b - PHI_COMPLEMENT * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while evals < max_evals && (b - a).abs() > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + PHI_COMPLEMENT * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - PHI_COMPLEMENT * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section maximization.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> (f64, f64) {
    let (x, neg) = golden_section_min(|t| -f(t), a, b, tol, max_evals);
    (x, -neg)
}

/// Bisection for a root of `f` on a bracket with a sign change.
///
/// Runs until the bracket is narrower than `xtol` (absolute). Returns the
/// midpoint of the final bracket.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (with a small absolute floor for integrals near zero).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // scale the tolerance by a coarse magnitude estimate so that relative
    // accuracy is meaningful even when the crude first panel is wrong
    let scale = whole.abs().max(1e-300);
    let mut evals = 0usize;
    let out = simpson_rec(
        f, a, m, b, fa, fm, fb, whole,
        rel_tol * scale,
        40,
        &mut evals,
    );
    match out {
        Some(v) => Ok(v),
        None => Err(Error::QuadratureFailure { tol: rel_tol }),
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
) -> Option<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    if *evals > 4_000_000 {
        return None;
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        if delta.abs() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        // Richardson correction gives one extra order
        return Some(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals)?;
    let r = simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals)?;
    Some(l + r)
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}
