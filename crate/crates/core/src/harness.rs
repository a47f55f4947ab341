//! The double-well experiment: ensembles of first transitions, per-path tube
//! sizes against the matching most probable transition path, time-binned
//! statistics, and figure data with minimal SVG renderings.
//!
//! A transition record pairs the first transition time `T` of a sample path
//! with the smallest tube radius around the MPTP of duration `T` that
//! contains the whole sample, `delta = sup_t |X_t - psi_T(t)|`. Solving one
//! boundary-value problem per record would dominate the runtime, so MPTPs
//! are memoized on a `T`-grid of step 0.01 and interpolated between
//! neighboring grid solutions in rescaled time; an audit path recomputes a
//! subsample with exact per-`T` solves to keep the approximation honest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriftSpec, SdeSystem};
use crate::simulate::{
    mix64, simulate_ensemble, step, Path, SimConfig, SplitMix64,
};
use crate::variational::{solve_mptp, ShootingSolution};

use rand_distr::{Distribution, StandardNormal};

/// Grid resolution for memoized MPTP solves.
const MPTP_GRID_STEP: f64 = 1e-2;

/// One observed transition with its tube size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub path_index: u64,
    /// First transition time.
    pub t: f64,
    /// sup_t |X_t - psi_T(t)| against the MPTP with matching duration.
    pub tube_size: f64,
}

/// A time bin with the mean tube size of the records inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub mean_tube_size: f64,
    pub count: u64,
}

/// Full experiment specification.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SdeSystem,
    pub sim: SimConfig,
    pub n_paths: u64,
    /// Cutoff for first transitions (defaults to the simulation horizon).
    pub horizon: f64,
    pub bin_edges: Vec<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.sim.validate()?;
        if self.horizon <= 0.0 || self.horizon > self.sim.horizon + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "experiment horizon {} must lie in (0, sim horizon = {}]",
                self.horizon, self.sim.horizon
            )));
        }
        if self.bin_edges.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two bin edges".into(),
            ));
        }
        if !self
            .bin_edges
            .windows(2)
            .all(|w| w[1] > w[0])
        {
            return Err(Error::InvalidParameter(
                "bin edges must be strictly increasing".into(),
            ));
        }
        let first = self.bin_edges[0];
        let last = *self.bin_edges.last().expect("non-empty");
        if first > 0.0 || last < self.horizon - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "bin edges [{first}, {last}] must cover (0, horizon = {}]",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// The paper-style bin edges: [0, 0.25), then width 0.05 up to 1.5.
pub fn default_bin_edges(horizon: f64) -> Vec<f64> {
    let mut edges = vec![0.0, 0.25];
    let mut e: f64 = 0.25;
    while e < horizon - 1e-12 {
        e += 0.05;
        edges.push(e.min(horizon));
    }
    edges
}

/// sup over the sample grid of |X_t - psi(t)| after aligning the MPTP onto
/// the sample grid by linear interpolation. Both paths must cover the same
/// window up to one step.
pub fn path_tube_size(sample: &Path, mptp: &Path) -> Result<f64> {
    let d_sample = sample.duration();
    let d_mptp = mptp.duration();
    let slack = sample.dt.max(mptp.dt) * (1.0 + 1e-9);
    if (d_sample - d_mptp).abs() > slack {
        return Err(Error::GridMismatch(format!(
            "windows differ: sample spans {d_sample}, mptp spans {d_mptp}"
        )));
    }
    let mut sup = 0.0f64;
    for (i, &x) in sample.values.iter().enumerate() {
        let t = sample.time_of(i) - sample.t0;
        let psi = mptp.value_at(mptp.t0 + t);
        sup = sup.max((x - psi).abs());
    }
    Ok(sup)
}

/// Everything `run_experiment` produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<TransitionRecord>,
    pub bins: Vec<BinStat>,
    pub n_paths: u64,
    pub n_censored_exit: u64,
    pub n_no_transition: u64,
    /// Transitions dropped because the MPTP solve failed at their T.
    pub n_mptp_failures: u64,
}

impl ExperimentOutcome {
    pub fn transition_fraction(&self) -> f64 {
        (self.records.len() as u64 + self.n_mptp_failures) as f64 / self.n_paths as f64
    }
}

/// Re-simulate path `index` of the ensemble up to (and including) the grid
/// point at `t_stop`; the per-path seeding makes this bit-identical to the
/// ensemble member without storing it.
fn resimulate_until(
    system: &SdeSystem,
    sim: &SimConfig,
    index: u64,
    t_stop: f64,
) -> Result<Path> {
    let n_keep = (t_stop / sim.dt).round() as usize;
    let mut rng = SplitMix64::new(mix64(sim.seed, index));
    let scale = system.c * sim.dt.sqrt();
    let mut values = Vec::with_capacity(n_keep + 1);
    let mut x = system.x0;
    values.push(x);
    for _ in 0..n_keep {
        let xi: f64 = StandardNormal.sample(&mut rng);
        x = step(system, x, scale * xi, sim)?;
        values.push(x);
    }
    Path::new(0.0, sim.dt, values)
}

fn grid_time(k: usize) -> f64 {
    k as f64 * MPTP_GRID_STEP
}

/// Interpolate the MPTP of duration `t` from the two neighboring memoized
/// grid solutions, matching them in rescaled time s = t/T.
fn interpolated_mptp_value(
    lower: &ShootingSolution,
    upper: &ShootingSolution,
    w: f64,
    s: f64,
) -> f64 {
    let t_lo = lower.path.duration();
    let t_hi = upper.path.duration();
    let a = lower.path.value_at(s * t_lo);
    let b = upper.path.value_at(s * t_hi);
    a * (1.0 - w) + b * w
}

/// Run the full experiment: simulate `n_paths`, attach a tube size to every
/// first transition before the horizon, and bin the tube sizes over time.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    if config.n_paths == 0 {
        return Ok(ExperimentOutcome {
            records: Vec::new(),
            bins: Vec::new(),
            n_paths: 0,
            n_censored_exit: 0,
            n_no_transition: 0,
            n_mptp_failures: 0,
        });
    }
    let summary = simulate_ensemble(&config.system, &config.sim, config.n_paths)?;

    // transitions past the experiment horizon count as "no transition"
    let mut transitions: Vec<(u64, f64)> = Vec::new();
    let mut n_no_transition = summary.n_no_transition;
    for tr in &summary.transitions {
        if tr.time <= config.horizon + 1e-12 {
            transitions.push((tr.path_index, tr.time));
        } else {
            n_no_transition += 1;
        }
    }

    // memoize every needed grid solve first, then attach tube sizes
    let mut needed: Vec<usize> = Vec::new();
    for &(_, t) in &transitions {
        let k0 = ((t / MPTP_GRID_STEP).floor() as usize).max(1);
        needed.push(k0);
        needed.push(k0 + 1);
    }
    needed.sort_unstable();
    needed.dedup();
    let solves: BTreeMap<usize, Option<ShootingSolution>> = needed
        .into_par_iter()
        .map(|k| (k, solve_mptp(&config.system, grid_time(k), 1e-8).ok()))
        .collect();

    let per_record: Vec<Option<TransitionRecord>> = transitions
        .par_iter()
        .map(|&(index, t)| {
            let k0 = ((t / MPTP_GRID_STEP).floor() as usize).max(1);
            let (lower, upper) = match (&solves[&k0], &solves[&(k0 + 1)]) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return None,
            };
            let w = ((t - grid_time(k0)) / MPTP_GRID_STEP).clamp(0.0, 1.0);
            let sample = match resimulate_until(&config.system, &config.sim, index, t) {
                Ok(p) => p,
                Err(_) => return None,
            };
            let duration = sample.duration();
            let mut sup = 0.0f64;
            for (i, &x) in sample.values.iter().enumerate() {
                let s = if duration > 0.0 {
                    (sample.time_of(i) / duration).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let psi = interpolated_mptp_value(lower, upper, w, s);
                sup = sup.max((x - psi).abs());
            }
            Some(TransitionRecord {
                path_index: index,
                t,
                tube_size: sup,
            })
        })
        .collect();

    let mut records = Vec::with_capacity(per_record.len());
    let mut n_mptp_failures = 0;
    for r in per_record {
        match r {
            Some(rec) => records.push(rec),
            None => n_mptp_failures += 1,
        }
    }
    records.sort_by_key(|r| r.path_index);

    let bins = bin_records(&records, &config.bin_edges);
    Ok(ExperimentOutcome {
        records,
        bins,
        n_paths: config.n_paths,
        n_censored_exit: summary.n_censored_exit,
        n_no_transition,
        n_mptp_failures,
    })
}

/// Mean tube size per time bin; the final bin includes its right edge.
pub fn bin_records(records: &[TransitionRecord], edges: &[f64]) -> Vec<BinStat> {
    let mut bins: Vec<BinStat> = edges
        .windows(2)
        .map(|w| BinStat {
            lo: w[0],
            hi: w[1],
            mean_tube_size: 0.0,
            count: 0,
        })
        .collect();
    let last = bins.len().saturating_sub(1);
    for r in records {
        let idx = bins
            .iter()
            .position(|b| r.t >= b.lo && (r.t < b.hi || (b.hi >= edges[edges.len() - 1] - 1e-12)))
            .unwrap_or(last);
        bins[idx].mean_tube_size += r.tube_size;
        bins[idx].count += 1;
    }
    for b in &mut bins {
        if b.count > 0 {
            b.mean_tube_size /= b.count as f64;
        } else {
            b.mean_tube_size = f64::NAN;
        }
    }
    bins
}

// ---------------------------------------------------------------------------
// Config file surface
// ---------------------------------------------------------------------------

/// On-disk configuration. System fields sit at the top level with the drift
/// as a nested object; `sim` and `experiment` sections are optional and fall
/// back to the double-well experiment defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    pub drift: DriftSpec,
    pub c: f64,
    pub l: f64,
    pub x0: f64,
    pub xf: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
}

fn default_kappa() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub scheme_kappa: f64,
    #[serde(default = "default_implicit_tol")]
    pub implicit_tol: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            dt: default_dt(),
            horizon: default_horizon(),
            seed: default_seed(),
            scheme_kappa: 0.0,
            implicit_tol: default_implicit_tol(),
        }
    }
}

fn default_dt() -> f64 {
    1e-4
}
fn default_horizon() -> f64 {
    1.5
}
fn default_seed() -> u64 {
    1
}
fn default_implicit_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    #[serde(default = "default_n_paths")]
    pub n_paths: u64,
    #[serde(default)]
    pub bin_edges: Option<Vec<f64>>,
    /// Transition cutoff; defaults to the simulation horizon.
    #[serde(default)]
    pub horizon: Option<f64>,
}

fn default_n_paths() -> u64 {
    30_000
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn system(&self) -> Result<SdeSystem> {
        SdeSystem::new(
            self.drift.build()?,
            self.c,
            self.l,
            self.x0,
            self.xf,
            self.kappa,
        )
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = self.sim.clone().unwrap_or_default();
        SimConfig {
            dt: s.dt,
            horizon: s.horizon,
            seed: s.seed,
            scheme_kappa: s.scheme_kappa,
            implicit_tol: s.implicit_tol,
        }
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let system = self.system()?;
        let sim = self.sim_config();
        let section = self.experiment.clone().unwrap_or(ExperimentSection {
            n_paths: default_n_paths(),
            bin_edges: None,
            horizon: None,
        });
        let horizon = section.horizon.unwrap_or(sim.horizon);
        let bin_edges = section
            .bin_edges
            .unwrap_or_else(|| default_bin_edges(horizon));
        let cfg = ExperimentConfig {
            system,
            sim,
            n_paths: section.n_paths,
            horizon,
            bin_edges,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// CSV and SVG output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: u64,
}

pub fn records_to_csv(records: &[TransitionRecord]) -> String {
    let mut out = String::from("path_index,T,tube_size\n");
    for r in records {
        writeln!(out, "{},{:.16e},{:.16e}", r.path_index, r.t, r.tube_size).unwrap();
    }
    out
}

pub fn bins_to_csv(bins: &[BinStat]) -> String {
    let mut out = String::from("bin_lo,bin_hi,mean_tube_size,count\n");
    for b in bins {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            b.lo, b.hi, b.mean_tube_size, b.count
        )
        .unwrap();
    }
    out
}

fn csv_rows(text: &str) -> u64 {
    text.lines().count().saturating_sub(1) as u64
}

/// A minimal polyline/point SVG chart; one series per (label, points) pair.
fn render_svg(title: &str, series: &[(&str, Vec<(f64, f64)>, bool)]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const M: f64 = 50.0;
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts, _) in series {
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| M + (x - x_min) / (x_max - x_min) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_min) / (y_max - y_min) * (H - 2.0 * M);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        title
    )
    .unwrap();
    // axes
    writeln!(
        svg,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#,
        H - M
    )
    .unwrap();
    for (label, corner_x, corner_y, anchor) in [
        (format!("{x_min:.3}"), M, H - M + 18.0, "middle"),
        (format!("{x_max:.3}"), W - M, H - M + 18.0, "middle"),
        (format!("{y_min:.3}"), M - 6.0, H - M, "end"),
        (format!("{y_max:.3}"), M - 6.0, M + 4.0, "end"),
    ] {
        writeln!(
            svg,
            r#"<text x="{corner_x}" y="{corner_y}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{label}</text>"#
        )
        .unwrap();
    }
    for (i, (label, pts, scatter)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        if *scatter {
            for &(x, y) in pts {
                if x.is_finite() && y.is_finite() {
                    writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}" fill-opacity="0.5"/>"#,
                        sx(x),
                        sy(y)
                    )
                    .unwrap();
                }
            }
        } else {
            let mut points = String::new();
            for &(x, y) in pts {
                if x.is_finite() && y.is_finite() {
                    write!(points, "{:.2},{:.2} ", sx(x), sy(y)).unwrap();
                }
            }
            writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                points.trim_end()
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#,
            W - M - 140.0,
            M + 16.0 * (i as f64 + 1.0)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Figure-series tube sizes per delta used by the action-curve figure.
const FIGURE_DELTAS: [f64; 3] = [0.3, 0.5, 0.8];

/// Produce the figure CSVs and SVGs in `out_dir` and return the manifest.
///
/// Writes `fig1_paths.csv` (sample paths of the configured system and of the
/// matching zero-drift system), `fig1_mptp.csv` (the long-time shooting
/// solution), `fig3_action_curves.csv` (modified action versus T per tube
/// size), `fig5_scatter.csv` (transition records), `fig5_bins.csv` (bin
/// means), plus one SVG per CSV.
pub fn reproduce_figures(config: &ExperimentConfig, out_dir: &FsPath) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = Vec::new();
    let mut emit = |name: &str, text: &str, rows: u64| -> Result<PathBuf> {
        let path = out_dir.join(name);
        std::fs::write(&path, text)?;
        manifest.push(ManifestEntry {
            file: name.to_string(),
            rows,
        });
        Ok(path)
    };

    // fig 1: sample paths (configured drift and zero drift) on a long window
    let sys = &config.system;
    let window = 10.0f64;
    let fig_dt = 1e-3;
    let fig_sim = SimConfig {
        dt: fig_dt,
        horizon: window,
        seed: config.sim.seed,
        scheme_kappa: config.sim.scheme_kappa,
        implicit_tol: config.sim.implicit_tol,
    };
    let bm_sys = SdeSystem {
        drift: crate::model::DriftModel::brownian(),
        ..sys.clone()
    };
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (system, k) in [(&bm_sys, 0u64), (&bm_sys, 1), (sys, 2), (sys, 3)] {
        let (p, _) = crate::simulate::simulate_path(system, &fig_sim, mix64(fig_sim.seed, k))?;
        columns.push(p.values);
    }
    let n_rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    let thin = 5;
    let mut fig1 = String::from("t,bm_a,bm_b,x_a,x_b\n");
    let mut fig1_series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 4];
    let mut i = 0;
    while i < n_rows {
        let t = i as f64 * fig_dt;
        write!(fig1, "{t:.16e}").unwrap();
        for (c, col) in columns.iter().enumerate() {
            write!(fig1, ",{:.16e}", col[i]).unwrap();
            fig1_series[c].push((t, col[i]));
        }
        fig1.push('\n');
        i += thin;
    }
    emit("fig1_paths.csv", &fig1, csv_rows(&fig1))?;
    let svg = render_svg(
        "sample paths",
        &[
            ("noise only a", fig1_series[0].clone(), false),
            ("noise only b", fig1_series[1].clone(), false),
            ("drift a", fig1_series[2].clone(), false),
            ("drift b", fig1_series[3].clone(), false),
        ],
    );
    emit("fig1_paths.svg", &svg, 4)?;

    // fig 1 bottom: the long-time most probable transition path
    let mptp = solve_mptp(sys, window, 1e-6)?;
    let mut fig1m = String::from("t,x\n");
    let mut mptp_pts = Vec::new();
    let stride = (mptp.path.values.len() / 1000).max(1);
    for (i, &x) in mptp.path.values.iter().enumerate().step_by(stride) {
        let t = mptp.path.time_of(i);
        writeln!(fig1m, "{t:.16e},{x:.16e}").unwrap();
        mptp_pts.push((t, x));
    }
    emit("fig1_mptp.csv", &fig1m, csv_rows(&fig1m))?;
    let svg = render_svg(
        "most probable transition path, long window",
        &[("mptp", mptp_pts, false)],
    );
    emit("fig1_mptp.svg", &svg, 1)?;

    // fig 3: modified action curves, one column per tube size
    let t_grid: Vec<f64> = (0..=24).map(|i| 0.3 + 0.05 * i as f64).collect();
    let base_rows = crate::variational::action_vs_time(sys, FIGURE_DELTAS[0], &t_grid);
    let mut fig3 = String::from("T");
    for d in FIGURE_DELTAS {
        write!(fig3, ",smom_delta_{d}").unwrap();
    }
    fig3.push('\n');
    let mut curve_series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); FIGURE_DELTAS.len()];
    for row in &base_rows {
        write!(fig3, "{:.16e}", row.t).unwrap();
        match row.values {
            Some((s_om, _, _)) => {
                for (j, d) in FIGURE_DELTAS.iter().enumerate() {
                    let s_mom = s_om + crate::action::tube_penalty_rate(sys.c, *d) * row.t;
                    write!(fig3, ",{s_mom:.16e}").unwrap();
                    curve_series[j].push((row.t, s_mom));
                }
            }
            None => {
                for _ in FIGURE_DELTAS {
                    write!(fig3, ",nan").unwrap();
                }
            }
        }
        fig3.push('\n');
    }
    emit("fig3_action_curves.csv", &fig3, csv_rows(&fig3))?;
    let labeled: Vec<(String, Vec<(f64, f64)>)> = FIGURE_DELTAS
        .iter()
        .zip(curve_series)
        .map(|(d, pts)| (format!("delta = {d}"), pts))
        .collect();
    let series_refs: Vec<(&str, Vec<(f64, f64)>, bool)> = labeled
        .iter()
        .map(|(l, pts)| (l.as_str(), pts.clone(), false))
        .collect();
    let svg = render_svg("modified action vs T", &series_refs);
    emit("fig3_action_curves.svg", &svg, FIGURE_DELTAS.len() as u64)?;

    // fig 5: the transition scatter and bin means
    let outcome = run_experiment(config)?;
    let rec_csv = records_to_csv(&outcome.records);
    emit("fig5_scatter.csv", &rec_csv, csv_rows(&rec_csv))?;
    let scatter: Vec<(f64, f64)> = outcome
        .records
        .iter()
        .map(|r| (r.t, r.tube_size))
        .collect();
    let svg = render_svg(
        "transition times and tube sizes",
        &[("records", scatter, true)],
    );
    emit("fig5_scatter.svg", &svg, outcome.records.len() as u64)?;

    let bins_csv = bins_to_csv(&outcome.bins);
    emit("fig5_bins.csv", &bins_csv, csv_rows(&bins_csv))?;
    let bin_pts: Vec<(f64, f64)> = outcome
        .bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (0.5 * (b.lo + b.hi), b.mean_tube_size))
        .collect();
    let svg = render_svg("mean tube size per bin", &[("bin means", bin_pts, false)]);
    emit("fig5_bins.svg", &svg, outcome.bins.len() as u64)?;

    Ok(manifest)
}
