//! Sample-path generation for the SDE, first-transition detection, and
//! reproducible Monte Carlo ensembles.
//!
//! Paths are integrated with the theta-scheme
//!
//! ```text
//! X_i - X_{i-1} = [kappa_s b(X_i) + (1 - kappa_s) b(X_{i-1})] dt + c (B_i - B_{i-1})
//! ```
//!
//! (`kappa_s = 0` is explicit Euler-Maruyama; `kappa_s > 0` solves the
//! implicit relation by Newton iteration). The domain has an absorbing
//! boundary: integration stops at the first grid point outside D.
//!
//! Reproducibility contract: path `i` of an ensemble draws its randomness
//! from a PRNG seeded with `mix64(master_seed, i)`. Results are therefore
//! independent of how paths are scheduled across workers, and a single path
//! can be re-simulated in isolation from its index alone.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rand::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SdeSystem;

/// A uniformly gridded time series; sample `i` lives at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Path {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path dt must be positive and finite, got {dt}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::PathTooShort {
                need: 2,
                got: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "path value",
                value: bad,
            });
        }
        Ok(Path { t0, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Duration from the first to the last sample.
    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation; clamps outside the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.dt;
        if s <= 0.0 {
            return self.values[0];
        }
        let n = self.values.len() - 1;
        if s >= n as f64 {
            return self.values[n];
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// The straight line from (0, x0) to (t_end, x1) on `n + 1` grid points.
    pub fn line(x0: f64, x1: f64, t_end: f64, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::PathTooShort { need: 2, got: n + 1 });
        }
        let dt = t_end / n as f64;
        let values = (0..=n)
            .map(|i| x0 + (x1 - x0) * i as f64 / n as f64)
            .collect();
        Path::new(0.0, dt, values)
    }

    /// CSV dump: header `t,x`, one row per grid point, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(self.values.len() * 48 + 8);
        buf.push_str("t,x\n");
        for (i, &x) in self.values.iter().enumerate() {
            writeln!(buf, "{:.16e},{:.16e}", self.time_of(i), x)
                .expect("string formatting cannot fail");
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Inverse of [`Path::write_csv`]; checks grid uniformity.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
                continue;
            }
            let mut parts = line.split(',');
            let (t, x) = match (parts.next(), parts.next()) {
                (Some(t), Some(x)) => (t, x),
                _ => {
                    return Err(Error::Config(format!(
                        "malformed path CSV at line {}: {line:?}",
                        lineno + 1
                    )))
                }
            };
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("bad number {s:?} at line {}: {e}", lineno + 1))
                })
            };
            times.push(parse(t)?);
            values.push(parse(x)?);
        }
        if times.len() < 2 {
            return Err(Error::PathTooShort {
                need: 2,
                got: times.len(),
            });
        }
        let t0 = times[0];
        let dt = times[1] - times[0];
        for (i, &t) in times.iter().enumerate() {
            let expect = t0 + i as f64 * dt;
            if (t - expect).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::IncompatibleGrids(format!(
                    "non-uniform time grid at row {i}: t = {t}, expected {expect}"
                )));
            }
        }
        Path::new(t0, dt, values)
    }
}

/// Integration controls for sample paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Theta-scheme weight; 0 = explicit Euler-Maruyama.
    #[serde(default)]
    pub scheme_kappa: f64,
    /// Newton tolerance for the implicit solve when `scheme_kappa > 0`.
    #[serde(default = "default_implicit_tol")]
    pub implicit_tol: f64,
}

fn default_implicit_tol() -> f64 {
    1e-12
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, seed: u64) -> Self {
        SimConfig {
            dt,
            horizon,
            seed,
            scheme_kappa: 0.0,
            implicit_tol: default_implicit_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.horizon < self.dt {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must be at least dt {}",
                self.horizon, self.dt
            )));
        }
        if !(self.implicit_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "implicit_tol must be positive, got {}",
                self.implicit_tol
            )));
        }
        if !(0.0..=1.0).contains(&self.scheme_kappa) {
            return Err(Error::InvalidParameter(format!(
                "scheme_kappa must lie in [0, 1], got {}",
                self.scheme_kappa
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt + 0.5).floor() as usize
    }
}

// ---------------------------------------------------------------------------
// RNG plumbing
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer; derives the per-path seed from (master, index).
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream generator: the per-path PRNG.
///
/// A fixed, platform-independent algorithm keeps ensembles bit-reproducible
/// regardless of worker count or target, and it is cheap enough that the
/// Gaussian draw dominates the step cost.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let mut chunks = dest.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rem = chunks.into_remainder();
        if !rem.is_empty() {
            let bytes = self.next_u64().to_le_bytes();
            rem.copy_from_slice(&bytes[..rem.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

impl SeedableRng for SplitMix64 {
    type Seed = [u8; 8];

    fn from_seed(seed: Self::Seed) -> Self {
        SplitMix64::new(u64::from_le_bytes(seed))
    }

    fn seed_from_u64(state: u64) -> Self {
        SplitMix64::new(state)
    }
}

/// The PRNG for path `index` of an ensemble with the given master seed.
pub fn path_rng(master_seed: u64, index: u64) -> SplitMix64 {
    SplitMix64::new(mix64(master_seed, index))
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

/// One theta-scheme step. `dw` is the already-scaled Gaussian increment
/// `c * sqrt(dt) * xi`.
pub fn step(system: &SdeSystem, x_prev: f64, dw: f64, config: &SimConfig) -> Result<f64> {
    let dt = config.dt;
    let kappa = config.scheme_kappa;
    let explicit_part = x_prev + (1.0 - kappa) * system.drift.b(x_prev) * dt + dw;
    if kappa == 0.0 {
        return Ok(explicit_part);
    }
    // Newton iteration on g(x) = x - kappa b(x) dt - explicit_part
    let mut x = x_prev + system.drift.b(x_prev) * dt + dw; // explicit predictor
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let g = x - kappa * system.drift.b(x) * dt - explicit_part;
        residual = g.abs();
        if residual <= config.implicit_tol {
            return Ok(x);
        }
        let dg = 1.0 - kappa * system.drift.db(x) * dt;
        if dg == 0.0 || !dg.is_finite() {
            break;
        }
        x -= g / dg;
        if !x.is_finite() {
            break;
        }
    }
    Err(Error::NewtonDivergence {
        iters: 50,
        residual,
    })
}

/// Integrate one sample path from `x0` until the horizon or the first exit
/// from D. On exit the path is truncated at the exiting sample and the flag
/// is set.
pub fn simulate_path(
    system: &SdeSystem,
    config: &SimConfig,
    path_seed: u64,
) -> Result<(Path, bool)> {
    config.validate()?;
    let mut rng = SplitMix64::new(path_seed);
    let n_steps = config.n_steps();
    let scale = system.c * config.dt.sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = system.x0;
    values.push(x);
    let mut exited = false;
    for _ in 0..n_steps {
        let xi: f64 = StandardNormal.sample(&mut rng);
        x = step(system, x, scale * xi, config)?;
        values.push(x);
        if (x - system.x0).abs() >= system.l {
            exited = true;
            break;
        }
    }
    Ok((Path::new(0.0, config.dt, values)?, exited))
}

/// First grid time at which the path reaches the far side of `xf`, i.e. the
/// first `i` with `(x_i - xf) * sign(x0 - xf) <= 0`.
///
/// # Panics
///
/// The path must start at the system's `x0` (and `x0 != xf`); violating the
/// precondition panics.
pub fn first_transition_time(path: &Path, system: &SdeSystem) -> Option<f64> {
    assert!(
        (path.values[0] - system.x0).abs() <= 1e-12 * system.x0.abs().max(1.0),
        "first_transition_time: path starts at {}, system x0 = {}",
        path.values[0],
        system.x0
    );
    assert!(system.x0 != system.xf, "x0 and xf must be distinct");
    let sign = (system.x0 - system.xf).signum();
    for (i, &x) in path.values.iter().enumerate() {
        if (x - system.xf) * sign <= 0.0 {
            return Some(path.time_of(i));
        }
    }
    None
}

/// A first transition observed in an ensemble; tube sizes are attached later
/// by the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub path_index: u64,
    pub time: f64,
}

/// Outcome counts of an ensemble run. The three categories partition the
/// ensemble: transitioned, absorbed at the boundary first, or ran out the
/// horizon without either.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub n_paths: u64,
    pub transitions: Vec<Transition>,
    pub n_censored_exit: u64,
    pub n_no_transition: u64,
}

impl EnsembleSummary {
    pub fn transition_fraction(&self) -> f64 {
        self.transitions.len() as f64 / self.n_paths as f64
    }
}

enum PathOutcome {
    Transitioned(f64),
    CensoredExit,
    NoTransition,
}

fn classify_path(system: &SdeSystem, config: &SimConfig, seed: u64) -> Result<PathOutcome> {
    // single pass without storing the path: track transition and exit inline
    let mut rng = SplitMix64::new(seed);
    let n_steps = config.n_steps();
    let scale = system.c * config.dt.sqrt();
    let sign = (system.x0 - system.xf).signum();
    let mut x = system.x0;
    if (x - system.xf) * sign <= 0.0 {
        return Ok(PathOutcome::Transitioned(0.0));
    }
    for i in 1..=n_steps {
        let xi: f64 = StandardNormal.sample(&mut rng);
        x = step(system, x, scale * xi, config)?;
        if (x - system.xf) * sign <= 0.0 {
            return Ok(PathOutcome::Transitioned(i as f64 * config.dt));
        }
        if (x - system.x0).abs() >= system.l {
            return Ok(PathOutcome::CensoredExit);
        }
    }
    Ok(PathOutcome::NoTransition)
}

/// Run `n` independent paths and classify each. Per-path seeds come from
/// `mix64(config.seed, i)`, so the summary is bit-identical for any worker
/// count.
pub fn simulate_ensemble(system: &SdeSystem, config: &SimConfig, n: u64) -> Result<EnsembleSummary> {
    if n == 0 {
        return Ok(EnsembleSummary {
            n_paths: 0,
            transitions: Vec::new(),
            n_censored_exit: 0,
            n_no_transition: 0,
        });
    }
    config.validate()?;
    system.validate()?;
    let outcomes: Vec<(u64, Result<PathOutcome>)> = (0..n)
        .into_par_iter()
        .map(|i| (i, classify_path(system, config, mix64(config.seed, i))))
        .collect();

    let mut transitions = Vec::new();
    let mut n_censored_exit = 0;
    let mut n_no_transition = 0;
    for (i, outcome) in outcomes {
        match outcome {
            Ok(PathOutcome::Transitioned(t)) => transitions.push(Transition {
                path_index: i,
                time: t,
            }),
            Ok(PathOutcome::CensoredExit) => n_censored_exit += 1,
            Ok(PathOutcome::NoTransition) => n_no_transition += 1,
            Err(e) => {
                return Err(Error::PathFailed {
                    path_index: i,
                    source: Box::new(e),
                })
            }
        }
    }
    transitions.sort_by_key(|t| t.path_index);
    Ok(EnsembleSummary {
        n_paths: n,
        transitions,
        n_censored_exit,
        n_no_transition,
    })
}

/// Monte Carlo mean first-exit time from the interval of the given half-width
/// around `x0`, with a 99% normal-approximation confidence half-width.
///
/// Exits are detected at grid points only, so the estimate carries an
/// O(sqrt(dt)) monitoring bias toward longer times.
pub fn exit_time_mc(
    system: &SdeSystem,
    enlarged_halfwidth: f64,
    config: &SimConfig,
    n: u64,
) -> Result<(f64, f64)> {
    if !(enlarged_halfwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "enlarged halfwidth must be positive, got {enlarged_halfwidth}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    config.validate()?;
    let results: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::new(mix64(config.seed, i));
            let n_steps = config.n_steps();
            let scale = system.c * config.dt.sqrt();
            let mut x = system.x0;
            for k in 1..=n_steps {
                let xi: f64 = StandardNormal.sample(&mut rng);
                // exit-time runs use the explicit scheme path unless the
                // config says otherwise
                x = match step(system, x, scale * xi, config) {
                    Ok(v) => v,
                    Err(_) => return None,
                };
                if (x - system.x0).abs() >= enlarged_halfwidth {
                    return Some(k as f64 * config.dt);
                }
            }
            None
        })
        .collect();

    let total = results.len();
    let exited: Vec<f64> = results.into_iter().flatten().collect();
    let failed = total - exited.len();
    if failed as f64 > 0.01 * total as f64 {
        return Err(Error::HorizonTooShort {
            failed,
            total,
            horizon: config.horizon,
        });
    }
    let n_ok = exited.len() as f64;
    let mean = exited.iter().sum::<f64>() / n_ok;
    let var = exited.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n_ok - 1.0);
    let ci = 2.575_829_303_548_901 * (var / n_ok).sqrt();
    Ok((mean, ci))
}
