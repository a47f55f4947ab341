//! `omt` — transition paths and transition times for 1-D additive-noise
//! SDEs from the command line.
//!
//! Every subcommand that needs a system takes `--config <json>`; the schema
//! is documented in the book and in `omt_core::harness::ConfigFile`. Output
//! is CSV on stdout unless a subcommand writes files.
//!
//! Exit codes: 0 success, 2 validation error (bad inputs or config),
//! 3 numerical failure (a solver did not converge), 1 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use omt_core::action::{fw_action, kappa_action, modified_om_action, om_action, tube_penalty_rate};
use omt_core::harness::{
    bins_to_csv, records_to_csv, reproduce_figures, ConfigFile, ExperimentConfig,
};
use omt_core::model::TubeSpec;
use omt_core::mptt::{
    brownian_mptt, condition_check, energy_shell_time, minimize_modified_action,
    transition_time_bounds,
};
use omt_core::simulate::{simulate_ensemble, simulate_path, mix64};
use omt_core::tube::{brownian_tube_probability, one_term_asymptote};
use omt_core::variational::{action_vs_time, energy_profile, solve_mptp};
use omt_core::{Error, Path};

#[derive(Parser)]
#[command(name = "omt", version, about = "Most probable transition paths and times for 1-D SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and report transition statistics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Number of paths (overrides the config's experiment section).
        #[arg(long)]
        n: Option<u64>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Dump this path index as CSV to --out.
        #[arg(long)]
        dump_path: Option<u64>,
        /// Output file for --dump-path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the Brownian tube-probability series.
    TubeProb {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Evaluate an action functional on a path read from CSV.
    Action {
        /// Path CSV with header `t,x`.
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Kappa for the kappa-functional (defaults to the config's kappa).
        #[arg(long)]
        kappa: Option<f64>,
        /// Tube radius for the modified functional.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Functional::Om)]
        functional: Functional,
    },
    /// Solve the most probable transition path at fixed T by shooting.
    Mptp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "T")]
        t: f64,
        /// Write the solution path as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Tabulate S_OM, S_mOM and E over a time grid.
    ActionCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 25)]
        n: usize,
    },
    /// Estimate the most probable transition time.
    Mptt {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Method::Action)]
        method: Method,
        #[arg(long, default_value_t = 0.05)]
        tmin: f64,
        #[arg(long, default_value_t = 2.0)]
        tmax: f64,
    },
    /// Two-sided bounds on the most probable transition time.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Run the transition experiment and write records and bins.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value = "records.csv")]
        records: PathBuf,
        #[arg(long, default_value = "bins.csv")]
        bins: PathBuf,
    },
    /// Write the figure CSVs and SVGs.
    Figures {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Functional {
    Om,
    Kappa,
    Mom,
    Fw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Action,
    Shell,
    Closed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Io(_)) {
                ExitCode::from(1)
            } else if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn load(config: &PathBuf, seed: Option<u64>) -> Result<ConfigFile, Error> {
    let mut cfg = ConfigFile::load(config)?;
    if let Some(seed) = seed {
        let mut sim = cfg.sim.clone().unwrap_or_default();
        sim.seed = seed;
        cfg.sim = Some(sim);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            config,
            n,
            seed,
            dump_path,
            out,
        } => {
            let cfg = load(&config, seed)?;
            let system = cfg.system()?;
            let sim = cfg.sim_config();
            if let Some(index) = dump_path {
                let (path, exited) = simulate_path(&system, &sim, mix64(sim.seed, index))?;
                match out {
                    Some(file) => path.write_csv(std::fs::File::create(file)?)?,
                    None => path.write_csv(std::io::stdout().lock())?,
                }
                eprintln!("path {index}: {} samples, exited = {exited}", path.len());
                return Ok(());
            }
            let n = n
                .or_else(|| cfg.experiment.as_ref().map(|e| e.n_paths))
                .unwrap_or(1000);
            let summary = simulate_ensemble(&system, &sim, n)?;
            println!("n_paths,n_transitions,n_censored_exit,n_no_transition,transition_fraction");
            println!(
                "{},{},{},{},{:.6}",
                summary.n_paths,
                summary.transitions.len(),
                summary.n_censored_exit,
                summary.n_no_transition,
                summary.transition_fraction()
            );
            Ok(())
        }
        Command::TubeProb { c, delta, t, tol } => {
            if !(c > 0.0 && delta > 0.0 && t >= 0.0 && tol > 0.0) {
                return Err(Error::InvalidParameter(
                    "tube-prob needs c > 0, delta > 0, T >= 0, tol > 0".into(),
                ));
            }
            println!("T,series,one_term");
            println!(
                "{t:.16e},{:.16e},{:.16e}",
                brownian_tube_probability(c, delta, t, tol),
                one_term_asymptote(c, delta, t)
            );
            Ok(())
        }
        Command::Action {
            path,
            config,
            kappa,
            delta,
            functional,
        } => {
            let cfg = load(&config, None)?;
            let system = cfg.system()?;
            let psi = Path::read_csv(std::fs::File::open(path)?)?;
            let value = match functional {
                Functional::Om => om_action(&psi, &system)?,
                Functional::Kappa => kappa_action(&psi, &system, kappa.unwrap_or(system.kappa))?,
                Functional::Mom => {
                    let delta = delta.ok_or_else(|| {
                        Error::InvalidParameter("--delta is required for the modified functional".into())
                    })?;
                    TubeSpec::new(delta, &system)?;
                    modified_om_action(&psi, &system, delta)?
                }
                Functional::Fw => {
                    let total = fw_action(&psi, &system)?;
                    println!("functional,total,kinetic_part,divergence_part,tube_penalty");
                    println!("fw,{total:.16e},{total:.16e},0,0");
                    return Ok(());
                }
            };
            let name = match functional {
                Functional::Om => "om",
                Functional::Kappa => "kappa",
                Functional::Mom => "mom",
                Functional::Fw => unreachable!(),
            };
            println!("functional,total,kinetic_part,divergence_part,tube_penalty");
            println!(
                "{name},{:.16e},{:.16e},{:.16e},{:.16e}",
                value.total, value.kinetic_part, value.divergence_part, value.tube_penalty
            );
            Ok(())
        }
        Command::Mptp {
            config,
            t,
            out,
            tol,
        } => {
            let cfg = load(&config, None)?;
            let system = cfg.system()?;
            let sol = solve_mptp(&system, t, tol)?;
            let (e_mean, e_drift) = energy_profile(&sol, &system);
            println!("T,v0,energy,energy_drift,residual,s_om,n_roots");
            println!(
                "{t:.16e},{:.16e},{:.16e},{:.3e},{:.3e},{:.16e},{}",
                sol.v0, e_mean, e_drift, sol.residual, sol.om_action.total, sol.n_roots
            );
            if let Some(file) = out {
                sol.path.write_csv(std::fs::File::create(file)?)?;
            }
            Ok(())
        }
        Command::ActionCurve {
            config,
            delta,
            tmin,
            tmax,
            n,
        } => {
            let cfg = load(&config, None)?;
            let system = cfg.system()?;
            TubeSpec::new(delta, &system)?;
            if !(tmin > 0.0 && tmax > tmin && n >= 2) {
                return Err(Error::InvalidParameter(
                    "need 0 < tmin < tmax and n >= 2".into(),
                ));
            }
            let grid: Vec<f64> = (0..n)
                .map(|i| tmin + (tmax - tmin) * i as f64 / (n - 1) as f64)
                .collect();
            println!("T,s_om,s_mom,E,note");
            for row in action_vs_time(&system, delta, &grid) {
                match row.values {
                    Some((s_om, s_mom, e)) => {
                        println!("{:.16e},{s_om:.16e},{s_mom:.16e},{e:.16e},", row.t)
                    }
                    None => println!(
                        "{:.16e},nan,nan,nan,{}",
                        row.t,
                        row.note.unwrap_or_default().replace(',', ";")
                    ),
                }
            }
            Ok(())
        }
        Command::Mptt {
            config,
            delta,
            method,
            tmin,
            tmax,
        } => {
            let cfg = load(&config, None)?;
            let system = cfg.system()?;
            TubeSpec::new(delta, &system)?;
            let t_star = match method {
                Method::Action => {
                    minimize_modified_action(&system, delta, (tmin, tmax), 1e-6)?.t_star
                }
                Method::Shell => energy_shell_time(&system, delta, (tmin, tmax))?,
                Method::Closed => {
                    if system.drift.coefficients().iter().any(|&a| a != 0.0) {
                        return Err(Error::InvalidParameter(
                            "--method closed applies to zero drift only".into(),
                        ));
                    }
                    brownian_mptt(system.x0, system.xf, delta, system.c)
                }
            };
            let s_mom = solve_mptp(&system, t_star, 1e-8)?.om_action.total
                + tube_penalty_rate(system.c, delta) * t_star;
            let sim = cfg.sim_config();
            let (rho, t_upper) = transition_time_bounds(&system, delta, &sim)?;
            let n_grid = 8;
            let grid: Vec<f64> = (0..n_grid)
                .map(|i| tmin + (tmax - tmin) * i as f64 / (n_grid - 1) as f64)
                .collect();
            let solvable: Vec<f64> = grid
                .into_iter()
                .filter(|&t| solve_mptp(&system, t, 1e-8).is_ok())
                .collect();
            let cond = condition_check(&system, delta, &solvable)?.0;
            println!("delta,t_star,s_mom,rho,t_upper,condition_ok");
            println!("{delta:.6},{t_star:.16e},{s_mom:.16e},{rho:.16e},{t_upper:.16e},{cond}");
            Ok(())
        }
        Command::Bounds { config, delta } => {
            let cfg = load(&config, None)?;
            let system = cfg.system()?;
            TubeSpec::new(delta, &system)?;
            let sim = cfg.sim_config();
            let (rho, t_upper) = transition_time_bounds(&system, delta, &sim)?;
            println!("delta,rho,t_upper");
            println!("{delta:.6},{rho:.16e},{t_upper:.16e}");
            Ok(())
        }
        Command::Experiment {
            config,
            seed,
            n,
            records,
            bins,
        } => {
            let cfg = load(&config, seed)?;
            let mut exp: ExperimentConfig = cfg.experiment_config()?;
            if let Some(n) = n {
                exp.n_paths = n;
            }
            let out = omt_core::harness::run_experiment(&exp)?;
            std::fs::write(&records, records_to_csv(&out.records))?;
            std::fs::write(&bins, bins_to_csv(&out.bins))?;
            println!(
                "n_paths,n_transitions,n_censored_exit,n_no_transition,n_mptp_failures,transition_fraction"
            );
            println!(
                "{},{},{},{},{},{:.6}",
                out.n_paths,
                out.records.len(),
                out.n_censored_exit,
                out.n_no_transition,
                out.n_mptp_failures,
                out.transition_fraction()
            );
            eprintln!(
                "wrote {} records to {} and {} bins to {}",
                out.records.len(),
                records.display(),
                out.bins.len(),
                bins.display()
            );
            Ok(())
        }
        Command::Figures {
            config,
            seed,
            out_dir,
        } => {
            let cfg = load(&config, seed)?;
            let exp = cfg.experiment_config()?;
            let manifest = reproduce_figures(&exp, &out_dir)?;
            println!("file,rows");
            for entry in &manifest {
                println!("{},{}", entry.file, entry.rows);
            }
            Ok(())
        }
    }
}
