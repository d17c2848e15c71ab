//! Argument parsing and dispatch for the `ffmin` binary.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ffmin_core::linesearch::{LineSearch, LsHConfig, LsParConfig};
use ffmin_core::model::{load_system, save_system};
use ffmin_core::optimizers::{CgConfig, CgVariant, GradientTolerance, StopCriteria, WiggleConfig};

use crate::commands::{
    batch_rank, bench_quadratic, energy, minimize_system, worstcase, BenchMethod, BenchOptions,
    Method, MinimizeOptions, Precision, RankOptions, SpectrumKind,
};
use crate::exit::{self, CliError};
use crate::trace::save_trace;

#[derive(Debug, Parser)]
#[command(
    name = "ffmin",
    version,
    about = "Force-field energy minimization, energy ranking and rate benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the energy breakdown and largest gradient component of a system file.
    Energy {
        file: PathBuf,
        #[arg(long, default_value = "f64")]
        precision: Precision,
    },
    /// Minimize one system.
    Minimize {
        file: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the minimized system.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize every candidate in a directory, rank by energy, report RMSD to a reference.
    BatchRank {
        dir: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Superimpose before RMSD (off: direct coordinate RMSD).
        #[arg(long)]
        superpose: bool,
        #[arg(long, default_value_t = 10.0)]
        rmsd_threshold: f64,
        #[arg(long, default_value_t = 30)]
        top: usize,
        /// Write the ranking as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check convergence-rate bounds on random convex quadratics.
    BenchQuadratic {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        spectrum: SpectrumKind,
        #[arg(long, default_value_t = 1e-3)]
        mu: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        /// Number of random instances (seeds 0..S).
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,100,200")]
        horizons: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "gd,cg,ofgm")]
        methods: Vec<BenchMethod>,
        #[arg(long, default_value = "prp")]
        cg_variant: CgVariant,
        #[arg(long, default_value_t = 1.05)]
        slack: f64,
    },
    /// Run the optimized gradient method on its worst-case function.
    Worstcase {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long = "N", default_value_t = 16)]
        horizon: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Gd,
    Sd,
    Hb,
    Nag,
    NagSc,
    Fgm,
    Ofgm,
    Cg,
    Lbfgs,
    Wiggle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineSearchName {
    H,
    Par,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "lbfgs")]
    pub method: MethodName,
    #[arg(long = "ls", value_enum, default_value = "par")]
    pub linesearch: LineSearchName,
    /// Initial line-search step, Å.
    #[arg(long, default_value_t = 1.0)]
    pub h0: f64,
    /// Parabolic refinements of the par line search.
    #[arg(long, default_value_t = 3)]
    pub refinements: usize,
    /// Start the par line search without the slope parabola.
    #[arg(long)]
    pub no_gradient_start: bool,
    /// LBFGS memory depth.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value = "prp")]
    pub cg_variant: CgVariant,
    /// CG restart period.
    #[arg(long, default_value_t = 100)]
    pub restart: usize,
    #[arg(long, default_value = "f64")]
    pub precision: Precision,
    /// Wiggle atom-selection seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lipschitz constant for gd, nag, nag-sc and fixed-step ofgm.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Strong-convexity constant for nag-sc.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Heavy-ball step.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Heavy-ball momentum.
    #[arg(long)]
    pub beta: Option<f64>,
    /// OFGM horizon.
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    /// Wiggle probe step, Å.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Wiggle iterations per trace row.
    #[arg(long, default_value_t = 100)]
    pub epoch: usize,
    /// Wiggle probes by exact recompute instead of the far-field linearization.
    #[arg(long)]
    pub no_incremental: bool,
    /// Wiggle near/far split radius, Å.
    #[arg(long, default_value_t = 7.0)]
    pub cutoff: f64,
    /// Wiggle full-recompute audit period.
    #[arg(long)]
    pub audit: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Budget on value plus gradient calls.
    #[arg(long)]
    pub max_calls: Option<u64>,
    /// Gradient-norm tolerance, relative to max(1, |grad f(x0)|).
    #[arg(long, default_value_t = 1e-6)]
    pub grad_tol: f64,
    /// Treat --grad-tol as absolute, kJ/(mol*Å).
    #[arg(long)]
    pub abs_grad_tol: bool,
    /// Wall-time budget, seconds.
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Keep iterating after a line-search failure.
    #[arg(long)]
    pub keep_going: bool,
}

fn required(value: Option<f64>, flag: &str, method: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::input(format!("--method {method} requires --{flag}")))
}

impl MethodArgs {
    pub fn to_options(&self) -> Result<MinimizeOptions, CliError> {
        let linesearch = match self.linesearch {
            LineSearchName::H => LineSearch::H(LsHConfig {
                h0: self.h0,
                ..LsHConfig::default()
            }),
            LineSearchName::Par => LineSearch::Par(LsParConfig {
                h0: self.h0,
                refinements: self.refinements,
                use_gradient_start: !self.no_gradient_start,
            }),
            LineSearchName::Exact => LineSearch::Exact,
        };
        let method = match self.method {
            MethodName::Gd => Method::Gd {
                lipschitz: required(self.lipschitz, "lipschitz", "gd")?,
            },
            MethodName::Sd => Method::Sd,
            MethodName::Hb => Method::HeavyBall {
                alpha: required(self.alpha, "alpha", "hb")?,
                beta: required(self.beta, "beta", "hb")?,
            },
            MethodName::Nag => Method::Nag {
                lipschitz: required(self.lipschitz, "lipschitz", "nag")?,
            },
            MethodName::NagSc => Method::NagSc {
                lipschitz: required(self.lipschitz, "lipschitz", "nag-sc")?,
                mu: required(self.mu, "mu", "nag-sc")?,
            },
            MethodName::Fgm => Method::Fgm,
            MethodName::Ofgm => Method::Ofgm {
                horizon: self.horizon,
                lipschitz: self.lipschitz,
            },
            MethodName::Cg => Method::Cg(CgConfig {
                variant: self.cg_variant,
                restart: self.restart,
            }),
            MethodName::Lbfgs => Method::Lbfgs { memory: self.m },
            MethodName::Wiggle => Method::Wiggle(WiggleConfig {
                step: self.step,
                seed: self.seed,
                iterations_per_epoch: self.epoch,
                use_incremental_coulomb: !self.no_incremental,
                cutoff: self.cutoff,
                audit_every: self.audit,
                record_moves: false,
            }),
        };
        let max_wall_time = match self.max_time {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(CliError::input("--max-time must be positive"))
            }
            t => t.map(Duration::from_secs_f64),
        };
        let stop = StopCriteria {
            max_iterations: self.max_iter,
            max_oracle_calls: self.max_calls,
            gradient_tol: if self.abs_grad_tol {
                GradientTolerance::Absolute(self.grad_tol)
            } else {
                GradientTolerance::Relative(self.grad_tol)
            },
            max_wall_time,
            stop_on_linesearch_failure: !self.keep_going,
        };
        linesearch
            .validate()
            .map_err(|e| CliError::Input(e.into()))?;
        Ok(MinimizeOptions {
            method,
            linesearch,
            stop,
            precision: self.precision,
        })
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::INPUT_ERROR
            } else {
                exit::SUCCESS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_error(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Energy { file, precision } => {
            let report = energy(&file, precision)?;
            writeln!(out, "{report}").map_err(io_error)?;
            Ok(exit::SUCCESS)
        }
        Command::Minimize {
            file,
            method,
            trace,
            out: out_file,
        } => {
            let options = method.to_options()?;
            let system = load_system(&file).map_err(|e| CliError::Input(e.into()))?;
            let outcome = minimize_system(&system, &options)?;
            writeln!(out, "{outcome}").map_err(io_error)?;
            if let Some(path) = trace {
                save_trace(&path, &outcome.trace)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(io_error)?;
            }
            if let Some(path) = out_file {
                save_system(&outcome.system, &path)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(io_error)?;
            }
            Ok(exit::for_status(outcome.status()))
        }
        Command::BatchRank {
            dir,
            reference,
            method,
            superpose,
            rmsd_threshold,
            top,
            report,
        } => {
            let options = RankOptions {
                minimize: method.to_options()?,
                superpose,
                rmsd_threshold,
                top,
            };
            let ranking = batch_rank(&dir, &reference, &options)?;
            writeln!(out, "{ranking}").map_err(io_error)?;
            if let Some(path) = report {
                let mut csv = String::from("rank,candidate,energy,rmsd,status\n");
                for (i, c) in ranking.entries.iter().enumerate() {
                    let status = c
                        .error
                        .clone()
                        .or(c.status.map(|s| s.to_string()))
                        .unwrap_or_default();
                    csv.push_str(&format!("{i},{},{},{},{status}\n", c.id, c.energy, c.rmsd));
                }
                fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(io_error)?;
            }
            Ok(exit::SUCCESS)
        }
        Command::BenchQuadratic {
            n,
            spectrum,
            mu,
            l,
            seeds,
            horizons,
            methods,
            cg_variant,
            slack,
        } => {
            let options = BenchOptions {
                n,
                spectrum,
                mu,
                l,
                seeds: (0..seeds).collect(),
                horizons,
                methods,
                cg_variant,
                slack,
            };
            let report = bench_quadratic(&options)?;
            writeln!(out, "{report}").map_err(io_error)?;
            Ok(if report.all_pass() {
                exit::SUCCESS
            } else {
                exit::FAILURE
            })
        }
        Command::Worstcase { n, horizon, l, r } => {
            let report = worstcase(n, horizon, l, r)?;
            writeln!(out, "{report}").map_err(io_error)?;
            Ok(exit::SUCCESS)
        }
    }
}
