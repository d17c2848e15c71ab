use std::fmt;

use anyhow::anyhow;
use ffmin_core::energy::{EnergyBreakdown, ForceField};
use ffmin_core::linesearch::LineSearch;
use ffmin_core::model::MolecularSystem;
use ffmin_core::optimizers::{
    atom_wiggle, cg, fgm, gradient_descent_fixed, heavy_ball, lbfgs, nesterov_momentum,
    nesterov_strongly_convex, ofgm, steepest_descent, CgConfig, Minimization, OfgmStep,
    OptimizerError, OptimizerTrace, Status, StopCriteria, WiggleConfig,
};
use ffmin_core::oracle::{MolecularObjective, Oracle};
use ffmin_core::real::Real;

use super::Precision;
use crate::exit::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Gd {
        lipschitz: f64,
    },
    Sd,
    HeavyBall {
        alpha: f64,
        beta: f64,
    },
    Nag {
        lipschitz: f64,
    },
    NagSc {
        lipschitz: f64,
        mu: f64,
    },
    Fgm,
    /// Fixed `1/L` steps when `lipschitz` is given, line search otherwise.
    Ofgm {
        horizon: usize,
        lipschitz: Option<f64>,
    },
    Cg(CgConfig),
    Lbfgs {
        memory: usize,
    },
    Wiggle(WiggleConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Gd { .. } => "gd",
            Method::Sd => "sd",
            Method::HeavyBall { .. } => "hb",
            Method::Nag { .. } => "nag",
            Method::NagSc { .. } => "nag-sc",
            Method::Fgm => "fgm",
            Method::Ofgm { .. } => "ofgm",
            Method::Cg(_) => "cg",
            Method::Lbfgs { .. } => "lbfgs",
            Method::Wiggle(_) => "wiggle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub method: Method,
    pub linesearch: LineSearch,
    pub stop: StopCriteria,
    pub precision: Precision,
}

impl MinimizeOptions {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            linesearch: LineSearch::default(),
            stop: StopCriteria::default(),
            precision: Precision::F64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    /// Input system with the best coordinates found.
    pub system: MolecularSystem,
    pub initial: EnergyBreakdown<f64>,
    /// Re-evaluated in double precision.
    pub final_energy: EnergyBreakdown<f64>,
    pub grad_norm: f64,
    pub trace: OptimizerTrace,
}

impl MinimizeOutcome {
    pub fn status(&self) -> Status {
        self.trace.status
    }
}

impl fmt::Display for MinimizeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.final_energy;
        writeln!(
            f,
            "method     {} ({})",
            self.trace.method, self.trace.precision
        )?;
        writeln!(f, "status     {}", self.trace.status)?;
        if let Some(msg) = &self.trace.message {
            writeln!(f, "message    {msg}")?;
        }
        writeln!(f, "iterations {}", self.trace.iterations())?;
        if let Some(last) = self.trace.last() {
            writeln!(
                f,
                "calls      {} value, {} gradient",
                last.value_calls, last.grad_calls
            )?;
        }
        writeln!(f, "initial    {:.6} kJ/mol", self.initial.total())?;
        writeln!(
            f,
            "final      {:.6} kJ/mol (stretch {:.4}, bend {:.4}, torsion {:.4}, coulomb {:.4}, vdw {:.4})",
            b.total(),
            b.stretch,
            b.bend,
            b.torsion,
            b.coulomb,
            b.vdw
        )?;
        write!(f, "|grad|     {:.6e} kJ/(mol*A)", self.grad_norm)
    }
}

pub fn minimize_system(
    system: &MolecularSystem,
    options: &MinimizeOptions,
) -> Result<MinimizeOutcome, CliError> {
    let ff64 = ForceField::<f64>::new(system);
    let x0 = system.flat_coords();
    let initial = ff64
        .energy(&x0)
        .map_err(|e| CliError::Input(anyhow!("start point: {e}")))?
        .to_f64();
    let (x, trace) = match options.precision {
        Precision::F32 => run::<f32>(system, options)?,
        Precision::F64 => run::<f64>(system, options)?,
    };
    let mut out = system.clone();
    out.set_flat_coords(&x);
    let (final_energy, grad) = ff64
        .energy_and_gradient(&x)
        .map_err(|e| CliError::Runtime(anyhow!("final point: {e}")))?;
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok(MinimizeOutcome {
        system: out,
        initial,
        final_energy,
        grad_norm,
        trace,
    })
}

fn run<T: Real>(
    system: &MolecularSystem,
    options: &MinimizeOptions,
) -> Result<(Vec<f64>, OptimizerTrace), CliError> {
    let ff = ForceField::<T>::new(system);
    let x0: Vec<T> = system.flat_coords().into_iter().map(T::c).collect();
    let stop = &options.stop;
    let ls = options.linesearch;
    let back = |x: Vec<T>| {
        x.into_iter()
            .map(|v| v.to_f64_lossy())
            .collect::<Vec<f64>>()
    };
    if let Method::Wiggle(config) = &options.method {
        let out = atom_wiggle(&ff, &x0, config, stop).map_err(config_error)?;
        return Ok((back(out.x), out.trace));
    }
    let objective = MolecularObjective::new(ff);
    let oracle = Oracle::new(&objective);
    let res: Result<Minimization<T>, OptimizerError> = match &options.method {
        Method::Gd { lipschitz } => gradient_descent_fixed(&oracle, &x0, T::c(*lipschitz), stop),
        Method::Sd => steepest_descent(&oracle, &x0, ls, stop),
        Method::HeavyBall { alpha, beta } => {
            heavy_ball(&oracle, &x0, T::c(*alpha), T::c(*beta), stop)
        }
        Method::Nag { lipschitz } => nesterov_momentum(&oracle, &x0, T::c(*lipschitz), stop),
        Method::NagSc { lipschitz, mu } => {
            nesterov_strongly_convex(&oracle, &x0, T::c(*lipschitz), T::c(*mu), stop)
        }
        Method::Fgm => fgm(&oracle, &x0, ls, stop),
        Method::Ofgm { horizon, lipschitz } => {
            let step = match lipschitz {
                Some(l) => OfgmStep::FixedL(T::c(*l)),
                None => OfgmStep::LineSearch(ls),
            };
            ofgm(&oracle, &x0, step, *horizon, stop)
        }
        Method::Cg(config) => cg(&oracle, &x0, *config, ls, stop),
        Method::Lbfgs { memory } => lbfgs(&oracle, &x0, *memory, ls, stop),
        Method::Wiggle(_) => unreachable!(),
    };
    let res = res.map_err(config_error)?;
    Ok((back(res.x), res.trace))
}

fn config_error(e: OptimizerError) -> CliError {
    CliError::Input(e.into())
}
