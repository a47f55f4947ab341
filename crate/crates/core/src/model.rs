//! Drift models, system specification, and the effective path potential.
//!
//! The system under study is the scalar SDE
//!
//! ```text
//! dX_t = b(X_t) dt + c dB_t
//! ```
//!
//! on the domain D = (x0 - l, x0 + l) with absorbing boundary, where x0 and
//! xf are metastable states (roots of the drift b). Drifts are polynomials,
//! so b', b'' and the antiderivative are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Absolute tolerance on |b(x0)|, |b(xf)| for the metastability check.
/// Endpoints are supplied analytically in every intended use, so this is a
/// guard against typos, not a numerical margin.
pub const META_TOL: f64 = 1e-10;

/// Polynomial drift b(x) = sum a_i x^i with exact calculus.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftModel {
    b: Poly,
    db: Poly,
    d2b: Poly,
    /// Antiderivative of b with zero constant, i.e. integral of b from 0 to x.
    anti: Poly,
}

impl DriftModel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let b = Poly::new(coefficients)?;
        Ok(Self::from_poly(b))
    }

    fn from_poly(b: Poly) -> Self {
        let db = b.derivative();
        let d2b = db.derivative();
        let anti = b.antiderivative();
        DriftModel { b, db, d2b, anti }
    }

    /// Zero drift: X_t is a rescaled Brownian motion.
    pub fn brownian() -> Self {
        Self::from_poly(Poly::zero())
    }

    /// Ornstein-Uhlenbeck drift b(x) = -theta x.
    pub fn ou(theta: f64) -> Result<Self> {
        Self::new(vec![0.0, -theta])
    }

    /// The bistable drift b(x) = x - x^3 with stable states at -1 and 1.
    pub fn double_well() -> Self {
        Self::from_poly(Poly::new(vec![0.0, 1.0, 0.0, -1.0]).expect("static coefficients"))
    }

    pub fn from_preset(name: &str) -> Result<Self> {
        match name {
            "brownian" => Ok(Self::brownian()),
            "ou" => Self::ou(1.0),
            "double-well" => Ok(Self::double_well()),
            other => Err(Error::Config(format!(
                "unknown drift preset {other:?} (expected \"brownian\", \"ou\" or \"double-well\")"
            ))),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        self.b.coeffs()
    }

    pub fn b(&self, x: f64) -> f64 {
        self.b.eval(x)
    }

    pub fn db(&self, x: f64) -> f64 {
        self.db.eval(x)
    }

    pub fn d2b(&self, x: f64) -> f64 {
        self.d2b.eval(x)
    }

    /// Integral of b from `from` to `x`, exact.
    pub fn antiderivative_from(&self, from: f64, x: f64) -> f64 {
        self.anti.eval(x) - self.anti.eval(from)
    }

    pub(crate) fn b_poly(&self) -> &Poly {
        &self.b
    }

    pub(crate) fn db_poly(&self) -> &Poly {
        &self.db
    }

    pub(crate) fn d2b_poly(&self) -> &Poly {
        &self.d2b
    }
}

/// All four exact evaluations of the drift at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEval {
    pub b: f64,
    pub db: f64,
    pub d2b: f64,
    /// Antiderivative of b relative to the reference point (the bound
    /// system's x0, or 0 when evaluating a bare model).
    pub u: f64,
}

/// Evaluate (b, b', b'', U) at x with U taken relative to 0.
pub fn drift_eval(model: &DriftModel, x: f64) -> Result<DriftEval> {
    drift_eval_from(model, 0.0, x)
}

pub fn drift_eval_from(model: &DriftModel, from: f64, x: f64) -> Result<DriftEval> {
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "x", value: x });
    }
    Ok(DriftEval {
        b: model.b(x),
        db: model.db(x),
        d2b: model.d2b(x),
        u: model.antiderivative_from(from, x),
    })
}

/// A validated SDE between two metastable states.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeSystem {
    pub drift: DriftModel,
    /// Noise intensity (state units per sqrt(time)).
    pub c: f64,
    /// Domain half-width; D = (x0 - l, x0 + l).
    pub l: f64,
    pub x0: f64,
    pub xf: f64,
    /// Action parameter kappa in [0, 1]; kappa = 1/2 gives the OM functional.
    pub kappa: f64,
}

/// Non-fatal observations from validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// |xf - x0| / l > 1/2: the separation is not small relative to the
    /// domain, so absorbing-boundary effects may be visible.
    SeparationNotSmall,
    /// Zero drift admits every point as a metastable state; accepted so the
    /// pure Brownian closed forms can be exercised.
    ZeroDrift,
}

impl SdeSystem {
    pub fn new(drift: DriftModel, c: f64, l: f64, x0: f64, xf: f64, kappa: f64) -> Result<Self> {
        let sys = SdeSystem {
            drift,
            c,
            l,
            x0,
            xf,
            kappa,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Check every invariant; returns warnings on success.
    pub fn validate(&self) -> Result<Vec<ValidationWarning>> {
        for (what, v) in [
            ("c", self.c),
            ("l", self.l),
            ("x0", self.x0),
            ("xf", self.xf),
            ("kappa", self.kappa),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what, value: v });
            }
        }
        if self.c <= 0.0 {
            return Err(Error::BadNoise { c: self.c });
        }
        if self.l <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "domain half-width must be positive, got l = {}",
                self.l
            )));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in [0, 1], got {}",
                self.kappa
            )));
        }
        let sep = (self.xf - self.x0).abs();
        if sep == 0.0 {
            return Err(Error::InvalidParameter(
                "x0 and xf must be distinct".into(),
            ));
        }
        if sep >= self.l {
            return Err(Error::DomainTooSmall {
                separation: sep,
                halfwidth: self.l,
            });
        }
        for (which, x) in [("x0", self.x0), ("xf", self.xf)] {
            let residual = self.drift.b(x).abs();
            if residual > META_TOL {
                return Err(Error::MetastabilityViolation {
                    which,
                    x,
                    residual,
                    tol: META_TOL,
                });
            }
        }
        let mut warnings = Vec::new();
        if self.drift.b_poly().is_zero() {
            warnings.push(ValidationWarning::ZeroDrift);
        }
        if sep / self.l > 0.5 {
            warnings.push(ValidationWarning::SeparationNotSmall);
        }
        Ok(warnings)
    }

    /// Antiderivative of b relative to x0 (the potential-like quantity used
    /// by the exit-time solver and the bound constants).
    pub fn u_of(&self, x: f64) -> f64 {
        self.drift.antiderivative_from(self.x0, x)
    }

    pub fn drift_eval(&self, x: f64) -> Result<DriftEval> {
        drift_eval_from(&self.drift, self.x0, x)
    }

    /// Effective path potential
    ///
    /// ```text
    /// U_eff(x) = -b(x)^2 / 2 - (c^2/2) b'(x)
    /// ```
    ///
    /// chosen as the exact first integral of the Euler-Lagrange equation
    /// psi'' = b'b + (c^2/2) b'', so -U_eff'(x) equals that right-hand side
    /// as a polynomial identity.
    pub fn path_potential(&self, x: f64) -> f64 {
        let b = self.drift.b(x);
        let db = self.drift.db(x);
        -0.5 * b * b - 0.5 * self.c * self.c * db
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x0 - self.l, self.x0 + self.l)
    }

    /// sup |b| over the closed domain, exact for polynomial drift.
    pub fn sup_abs_drift_on_domain(&self) -> f64 {
        let (lo, hi) = self.domain();
        self.drift.b_poly().sup_abs(lo, hi)
    }
}

/// Validate and return the system unchanged (with warnings discarded).
pub fn validate_system(system: SdeSystem) -> Result<SdeSystem> {
    system.validate()?;
    Ok(system)
}

/// Tube radius around a candidate path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub delta: f64,
}

impl TubeSpec {
    pub fn new(delta: f64, system: &SdeSystem) -> Result<Self> {
        let sep = (system.xf - system.x0).abs();
        if !delta.is_finite() || delta <= 0.0 || delta >= sep {
            return Err(Error::BadTube {
                delta,
                separation: sep,
            });
        }
        Ok(TubeSpec { delta })
    }
}

/// Drift entry as it appears in config files: either a named preset or raw
/// coefficients a0..am.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriftSpec {
    Preset { preset: String },
    Coeffs { coeffs: Vec<f64> },
}

impl DriftSpec {
    pub fn build(&self) -> Result<DriftModel> {
        match self {
            DriftSpec::Preset { preset } => DriftModel::from_preset(preset),
            DriftSpec::Coeffs { coeffs } => DriftModel::new(coeffs.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dw_system() -> SdeSystem {
        SdeSystem::new(DriftModel::double_well(), 1.0, 5.0, -1.0, 1.0, 0.5).unwrap()
    }

    #[test]
    fn drift_eval_double_well() {
        let dw = DriftModel::double_well();
        let e = drift_eval(&dw, 1.0).unwrap();
        assert_eq!(e.b, 0.0);
        assert_eq!(e.db, -2.0);
        assert_eq!(e.d2b, -6.0);
        let e0 = drift_eval(&dw, 0.0).unwrap();
        assert_eq!(e0.b, 0.0);
        assert_eq!(e0.db, 1.0);
        assert_eq!(e0.d2b, 0.0);
    }

    #[test]
    fn drift_eval_brownian_is_zero() {
        let bm = DriftModel::brownian();
        for x in [-3.0, 0.0, 7.5] {
            let e = drift_eval(&bm, x).unwrap();
            assert_eq!((e.b, e.db, e.d2b, e.u), (0.0, 0.0, 0.0, 0.0));
        }
        assert!(drift_eval(&bm, f64::INFINITY).is_err());
    }

    #[test]
    fn validate_accepts_double_well_and_rejects_non_roots() {
        assert!(dw_system().validate().is_ok());

        let bad = SdeSystem {
            drift: DriftModel::double_well(),
            c: 1.0,
            l: 5.0,
            x0: 0.5,
            xf: 1.0,
            kappa: 0.5,
        };
        match bad.validate() {
            Err(Error::MetastabilityViolation { residual, .. }) => {
                assert_relative_eq!(residual, 0.375)
            }
            other => panic!("expected metastability violation, got {other:?}"),
        }
    }

    #[test]
    fn validate_flags_zero_drift_but_accepts_it() {
        let sys = SdeSystem::new(DriftModel::brownian(), 1.0, 5.0, 0.0, 1.0, 0.5).unwrap();
        let warnings = sys.validate().unwrap();
        assert!(warnings.contains(&ValidationWarning::ZeroDrift));
    }

    #[test]
    fn validate_rejects_bad_noise_and_small_domain() {
        let mut sys = dw_system();
        sys.c = 0.0;
        assert!(matches!(sys.validate(), Err(Error::BadNoise { .. })));
        let mut sys = dw_system();
        sys.l = 1.5;
        assert!(matches!(sys.validate(), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn validate_is_idempotent() {
        let sys = dw_system();
        let w1 = sys.validate().unwrap();
        let w2 = sys.validate().unwrap();
        assert_eq!(w1, w2);
        let same = validate_system(sys.clone()).unwrap();
        assert_eq!(same, sys);
    }

    #[test]
    fn path_potential_values() {
        let sys = dw_system();
        assert_relative_eq!(sys.path_potential(0.0), -0.5);
        assert_relative_eq!(sys.path_potential(1.0), 1.0);
        let bm = SdeSystem::new(DriftModel::brownian(), 1.0, 5.0, 0.0, 1.0, 0.5).unwrap();
        for x in [-2.0, 0.0, 3.0] {
            assert_eq!(bm.path_potential(x), 0.0);
        }
    }

    #[test]
    fn path_potential_gradient_matches_el_rhs() {
        // -U_eff'(x) = b'b + (c^2/2) b'' up to O(h^2) finite differences
        let sys = dw_system();
        let h = 1e-5;
        for i in 0..41 {
            let x = -2.0 + 0.1 * i as f64;
            let fd = -(sys.path_potential(x + h) - sys.path_potential(x - h)) / (2.0 * h);
            let exact = sys.drift.db(x) * sys.drift.b(x) + 0.5 * sys.c * sys.c * sys.drift.d2b(x);
            assert_relative_eq!(fd, exact, max_relative = 1e-7, epsilon = 1e-7);
        }
    }

    #[test]
    fn drift_derivatives_match_finite_differences() {
        let dw = DriftModel::double_well();
        let h = 1e-6;
        for i in 0..21 {
            let x = -5.0 + 0.5 * i as f64;
            let fd1 = (dw.b(x + h) - dw.b(x - h)) / (2.0 * h);
            assert_relative_eq!(fd1, dw.db(x), max_relative = 1e-6, epsilon = 1e-6);
        }
    }

    #[test]
    fn tube_spec_bounds() {
        let sys = dw_system();
        assert!(TubeSpec::new(0.5, &sys).is_ok());
        assert!(TubeSpec::new(0.0, &sys).is_err());
        assert!(TubeSpec::new(2.0, &sys).is_err());
        assert!(TubeSpec::new(2.5, &sys).is_err());
    }

    #[test]
    fn drift_spec_parses_both_forms() {
        let p: DriftSpec = serde_json::from_str(r#"{"preset": "double-well"}"#).unwrap();
        let m = p.build().unwrap();
        assert_eq!(m, DriftModel::double_well());
        let c: DriftSpec = serde_json::from_str(r#"{"coeffs": [0.0, 1.0, 0.0, -1.0]}"#).unwrap();
        assert_eq!(c.build().unwrap(), DriftModel::double_well());
    }
}
