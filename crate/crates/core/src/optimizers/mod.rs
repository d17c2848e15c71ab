//! Minimization methods over an [`Oracle`].
//!
//! Every driver records one trace row per iteration (row 0 is the start
//! point) and returns the best point it has evaluated, which for the
//! monotone line-search methods is simply the last iterate.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::linesearch::{LineSearchError, LineSearchResult, LineSearcher};
use crate::oracle::{Oracle, OracleError};
use crate::real::Real;

mod cg;
mod descent;
mod fgm;
mod lbfgs;
mod momentum;
mod wiggle;

pub use cg::{cg, CgConfig, CgVariant};
pub use descent::steepest_descent;
pub use fgm::{fgm, fgm_theta, ofgm, ofgm_schedule, OfgmSchedule, OfgmStep};
pub use lbfgs::{lbfgs, lbfgs_direction, LbfgsMemory};
pub use momentum::{
    gradient_descent_fixed, heavy_ball, nesterov_momentum, nesterov_strongly_convex,
};
pub use wiggle::{atom_wiggle, WiggleConfig, WiggleMove, WiggleOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    LineSearch(#[from] LineSearchError),
    #[error("cannot evaluate the start point: {0}")]
    StartPoint(OracleError),
}

/// Gradient-norm stopping threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientTolerance {
    /// `tol * max(1, ||grad f(x0)||)`
    Relative(f64),
    Absolute(f64),
}

impl GradientTolerance {
    pub fn threshold(&self, initial_grad_norm: f64) -> f64 {
        match *self {
            GradientTolerance::Relative(t) => t * initial_grad_norm.max(1.0),
            GradientTolerance::Absolute(t) => t,
        }
    }
}

impl fmt::Display for GradientTolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientTolerance::Relative(t) => write!(f, "{t:e}*max(1,|g0|)"),
            GradientTolerance::Absolute(t) => write!(f, "{t:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopCriteria {
    pub max_iterations: usize,
    /// Value plus gradient calls.
    pub max_oracle_calls: Option<u64>,
    pub gradient_tol: GradientTolerance,
    pub max_wall_time: Option<Duration>,
    pub stop_on_linesearch_failure: bool,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            max_oracle_calls: None,
            gradient_tol: GradientTolerance::Relative(1e-6),
            max_wall_time: None,
            stop_on_linesearch_failure: true,
        }
    }
}

impl StopCriteria {
    pub fn iterations(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            ..Default::default()
        }
    }

    pub fn with_gradient_tol(mut self, tol: GradientTolerance) -> Self {
        self.gradient_tol = tol;
        self
    }

    pub fn describe(&self) -> String {
        let calls = self
            .max_oracle_calls
            .map_or("none".to_string(), |c| c.to_string());
        let time = self
            .max_wall_time
            .map_or("none".to_string(), |t| format!("{}s", t.as_secs_f64()));
        format!(
            "max_iter={} max_calls={} grad_tol={} max_time={} stop_on_ls_failure={}",
            self.max_iterations, calls, self.gradient_tol, time, self.stop_on_linesearch_failure
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationBudget,
    OracleBudget,
    LinesearchFailure,
    TimeBudget,
    /// Objective grew past a thousand times its initial magnitude.
    Diverged,
    /// The objective could not be evaluated at an iterate.
    EvaluationError,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::IterationBudget => "iteration_budget",
            Status::OracleBudget => "oracle_budget",
            Status::LinesearchFailure => "linesearch_failure",
            Status::TimeBudget => "time_budget",
            Status::Diverged => "diverged",
            Status::EvaluationError => "evaluation_error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub wall_seconds: f64,
    pub f: f64,
    pub best_f: f64,
    /// NaN for derivative-free rows.
    pub grad_norm: f64,
    pub step: f64,
    pub value_calls: u64,
    pub grad_calls: u64,
    /// Conjugate-gradient coefficient; `None` on restarts and for other methods.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace {
    pub method: String,
    pub config: String,
    pub seed: Option<u64>,
    pub precision: &'static str,
    pub records: Vec<TraceRecord>,
    pub status: Status,
    pub message: Option<String>,
}

impl OptimizerTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimization<T> {
    /// Best point evaluated.
    pub x: Vec<T>,
    pub f: T,
    pub trace: OptimizerTrace,
}

impl<T> Minimization<T> {
    pub fn status(&self) -> Status {
        self.trace.status
    }
}

/// Shared bookkeeping: trace rows, best point, stop tests.
pub(crate) struct Driver<'o, 'a, T: Real> {
    oracle: &'o Oracle<'a, T>,
    stop: StopCriteria,
    start: Instant,
    tol: T,
    f0: T,
    best_x: Vec<T>,
    best_f: T,
    trace: OptimizerTrace,
}

impl<'o, 'a, T: Real> Driver<'o, 'a, T> {
    pub fn new(
        oracle: &'o Oracle<'a, T>,
        stop: &StopCriteria,
        method: &str,
        config: String,
        x0: &[T],
        f0: T,
        grad_norm0: T,
    ) -> Self {
        let start = Instant::now();
        let tol = T::c(stop.gradient_tol.threshold(grad_norm0.to_f64_lossy()));
        let mut driver = Self {
            oracle,
            stop: stop.clone(),
            start,
            tol,
            f0,
            best_x: x0.to_vec(),
            best_f: f0,
            trace: OptimizerTrace {
                method: method.to_string(),
                config: format!("{config} {}", stop.describe()),
                seed: None,
                precision: T::NAME,
                records: Vec::new(),
                status: Status::IterationBudget,
                message: None,
            },
        };
        driver.record(0, f0, grad_norm0, T::zero(), None);
        driver
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.trace.seed = Some(seed);
    }

    pub fn stop_on_linesearch_failure(&self) -> bool {
        self.stop.stop_on_linesearch_failure
    }

    /// Updates the best point if `f` strictly improves on it.
    pub fn offer(&mut self, x: &[T], f: T) {
        if f < self.best_f {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
    }

    pub fn record(&mut self, iteration: usize, f: T, grad_norm: T, step: T, beta: Option<T>) {
        self.trace.records.push(TraceRecord {
            iteration,
            wall_seconds: self.start.elapsed().as_secs_f64(),
            f: f.to_f64_lossy(),
            best_f: self.best_f.to_f64_lossy(),
            grad_norm: grad_norm.to_f64_lossy(),
            step: step.to_f64_lossy(),
            value_calls: self.oracle.value_calls(),
            grad_calls: self.oracle.grad_calls(),
            beta: beta.map(|b| b.to_f64_lossy()),
        });
    }

    /// Stop test before starting iteration `completed + 1`.
    pub fn check(&self, completed: usize, grad_norm: T) -> Option<Status> {
        if grad_norm <= self.tol {
            return Some(Status::Converged);
        }
        self.budget_exhausted(completed)
    }

    pub fn budget_exhausted(&self, completed: usize) -> Option<Status> {
        if completed >= self.stop.max_iterations {
            return Some(Status::IterationBudget);
        }
        if let Some(max) = self.stop.max_oracle_calls {
            if self.oracle.total_calls() >= max {
                return Some(Status::OracleBudget);
            }
        }
        if let Some(max) = self.stop.max_wall_time {
            if self.start.elapsed() >= max {
                return Some(Status::TimeBudget);
            }
        }
        None
    }

    pub fn diverged(&self, f: T) -> bool {
        let scale = self.f0.abs().max(T::min_positive_value());
        f > T::c(1e3) * scale
    }

    pub fn finish(mut self, status: Status, message: Option<String>) -> Minimization<T> {
        self.trace.status = status;
        self.trace.message = message;
        Minimization {
            x: self.best_x,
            f: self.best_f,
            trace: self.trace,
        }
    }

    pub fn fail(self, err: OracleError) -> Minimization<T> {
        self.finish(Status::EvaluationError, Some(err.to_string()))
    }
}

/// Evaluates the start point, mapping failures to a configuration-level error.
pub(crate) fn start_point<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
) -> Result<(T, Vec<T>), OptimizerError> {
    oracle
        .value_and_gradient(x0)
        .map_err(OptimizerError::StartPoint)
}

/// Runs one line search. The outer error is a configuration problem; the
/// inner one an evaluation failure the caller turns into a status.
pub(crate) fn run_search<T: Real>(
    searcher: &mut LineSearcher,
    oracle: &Oracle<'_, T>,
    x: &[T],
    r: &[T],
    f: T,
    g: &[T],
) -> Result<Result<LineSearchResult<T>, OracleError>, OptimizerError> {
    match searcher.search(oracle, x, r, f, Some(g)) {
        Ok(res) => Ok(Ok(res)),
        Err(LineSearchError::Oracle(e)) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

/// `-g / ||g||`, or `None` for a zero gradient.
pub(crate) fn unit_antigradient<T: Real>(g: &[T]) -> Option<Vec<T>> {
    let n = crate::real::norm(g);
    (n > T::zero()).then(|| g.iter().map(|&v| -v / n).collect())
}

/// `d / ||d||`, or `None` for a zero vector.
pub(crate) fn normalized<T: Real>(d: &[T]) -> Option<Vec<T>> {
    let n = crate::real::norm(d);
    (n > T::zero() && n.is_finite()).then(|| d.iter().map(|&v| v / n).collect())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Asserts the shared trace invariants.
    pub fn check_trace(trace: &OptimizerTrace, oracle: &Oracle<'_, f64>) {
        let mut prev = f64::INFINITY;
        for (i, r) in trace.records.iter().enumerate() {
            assert!(r.best_f <= prev, "best-so-far increased at row {i}");
            prev = r.best_f;
            if i > 0 {
                assert!(r.iteration > trace.records[i - 1].iteration);
                assert!(r.value_calls >= trace.records[i - 1].value_calls);
                assert!(r.grad_calls >= trace.records[i - 1].grad_calls);
            }
        }
        let last = trace.records.last().unwrap();
        assert!(last.value_calls <= oracle.value_calls());
        assert!(last.grad_calls <= oracle.grad_calls());
    }
}
