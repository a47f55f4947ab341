//! Dense univariate polynomials over f64.
//!
//! Drifts are restricted to polynomials so that derivatives, antiderivatives,
//! products (for b*b' and b^2) and suprema over intervals are exact up to
//! rounding, with no finite-difference noise entering the Euler-Lagrange
//! right-hand side or the bound constants.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 10;

/// Coefficients in ascending order: p(x) = c[0] + c[1] x + ... + c[m] x^m.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial degree {} exceeds the supported maximum {}",
                coeffs.len() - 1,
                MAX_DEGREE
            )));
        }
        for (i, &c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    what: "polynomial coefficient",
                    value: c,
                });
            }
            let _ = i;
        }
        let mut coeffs = coeffs;
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Poly { coeffs })
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        let mut d = self.coeffs.len() - 1;
        while d > 0 && self.coeffs[d] == 0.0 {
            d -= 1;
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Term-wise derivative.
    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly { coeffs }
    }

    /// Term-wise antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k as f64 + 1.0));
        }
        Poly { coeffs }
    }

    /// Definite integral over [a, b], exact up to rounding.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly { coeffs }
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Poly { coeffs }
    }

    /// Supremum of |p| over the closed interval [a, b].
    ///
    /// Candidates are the endpoints, a dense grid, and interior extrema found
    /// by bisecting sign changes of p' between grid points. For polynomials a
    /// sign change of the derivative brackets every strict local extremum the
    /// grid can resolve; extrema of |p| at inflections without sign change do
    /// not exist.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        sup_on_interval(self, a, b, 2048)
    }
}

pub(crate) fn sup_on_interval(p: &Poly, a: f64, b: f64, n_grid: usize) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if a == b {
        return p.eval(a).abs();
    }
    let dp = p.derivative();
    let h = (b - a) / n_grid as f64;
    let mut best = p.eval(a).abs().max(p.eval(b).abs());
    let mut prev_x = a;
    let mut prev_d = dp.eval(a);
    for i in 1..=n_grid {
        let x = if i == n_grid { b } else { a + i as f64 * h };
        best = best.max(p.eval(x).abs());
        let d = dp.eval(x);
        if prev_d == 0.0 {
            best = best.max(p.eval(prev_x).abs());
        } else if prev_d * d < 0.0 {
            let root = bisect_root(&dp, prev_x, x);
            best = best.max(p.eval(root).abs());
        }
        prev_x = x;
        prev_d = d;
    }
    best
}

/// Maximum of p (not |p|) over [a, b]; same candidate construction.
pub(crate) fn max_on_interval(p: &Poly, a: f64, b: f64, n_grid: usize) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if a == b {
        return p.eval(a);
    }
    let dp = p.derivative();
    let h = (b - a) / n_grid as f64;
    let mut best = p.eval(a).max(p.eval(b));
    let mut prev_x = a;
    let mut prev_d = dp.eval(a);
    for i in 1..=n_grid {
        let x = if i == n_grid { b } else { a + i as f64 * h };
        best = best.max(p.eval(x));
        let d = dp.eval(x);
        if prev_d * d < 0.0 {
            let root = bisect_root(&dp, prev_x, x);
            best = best.max(p.eval(root));
        }
        prev_x = x;
        prev_d = d;
    }
    best
}

fn bisect_root(p: &Poly, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = p.eval(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = p.eval(mid);
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
