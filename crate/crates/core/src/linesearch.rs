//! Inexact one-dimensional searches along a unit direction.
//!
//! Both procedures spend as few oracle calls as possible: a step is accepted
//! as soon as it strictly relaxes `f(x0)`, and the expansion/parabola logic
//! only tries to improve on it by a bounded number of extra probes.

use std::cmp::Ordering;

use thiserror::Error;

use crate::oracle::{Oracle, OracleError};
use crate::real::{dot, norm, offset, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineSearchError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("parabola abscissae must be pairwise distinct")]
    DuplicateAbscissa,
    #[error("gradient start requested but no gradient supplied")]
    MissingGradient,
    #[error("objective has no closed-form line minimizer")]
    ExactUnavailable,
    #[error("search direction must have unit length, got norm {0}")]
    NotUnitDirection(f64),
    #[error("invalid line-search configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchStatus {
    Found,
    NoRelaxation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult<T> {
    /// Signed step along the direction; zero when nothing relaxed.
    pub step: T,
    pub f: T,
    pub oracle_calls: u32,
    pub status: LineSearchStatus,
}

impl<T: Real> LineSearchResult<T> {
    fn found(step: T, f: T, oracle_calls: u32) -> Self {
        Self {
            step,
            f,
            oracle_calls,
            status: LineSearchStatus::Found,
        }
    }

    fn none(f0: T, oracle_calls: u32) -> Self {
        Self {
            step: T::zero(),
            f: f0,
            oracle_calls,
            status: LineSearchStatus::NoRelaxation,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == LineSearchStatus::Found
    }
}

/// Expansion/contraction search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsHConfig {
    pub h0: f64,
    pub eps_h: f64,
    pub k_plus: f64,
    pub k_minus: f64,
}

impl Default for LsHConfig {
    fn default() -> Self {
        Self {
            h0: 1.0,
            eps_h: 1e-10,
            k_plus: 2.0,
            k_minus: 0.5,
        }
    }
}

impl LsHConfig {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(LineSearchError::Config(format!(
                "h0 must be positive, got {}",
                self.h0
            )));
        }
        if !(self.eps_h > 0.0 && self.eps_h < 1.0) {
            return Err(LineSearchError::Config(format!(
                "eps_h must be in (0,1), got {}",
                self.eps_h
            )));
        }
        if !(self.k_plus > 1.0 && self.k_plus.is_finite()) {
            return Err(LineSearchError::Config(format!(
                "k_plus must exceed 1, got {}",
                self.k_plus
            )));
        }
        if !(self.k_minus > 0.0 && self.k_minus < 1.0) {
            return Err(LineSearchError::Config(format!(
                "k_minus must be in (0,1), got {}",
                self.k_minus
            )));
        }
        Ok(())
    }

    /// Upper bound on oracle calls of one [`ls_h`] invocation started at `h0`.
    pub fn call_budget(&self, h0: f64) -> u32 {
        let contractions = ((h0 / self.eps_h).ln() / (1.0 / self.k_minus).ln()).ceil();
        2 + contractions.max(0.0) as u32
    }
}

/// Successive parabolic interpolation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsParConfig {
    pub h0: f64,
    /// Number of parabola stages, at least 2.
    pub refinements: usize,
    /// Seed the first parabola with the directional derivative at `x0`.
    pub use_gradient_start: bool,
}

impl Default for LsParConfig {
    fn default() -> Self {
        Self {
            h0: 1.0,
            refinements: 3,
            use_gradient_start: true,
        }
    }
}

impl LsParConfig {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(LineSearchError::Config(format!(
                "h0 must be positive, got {}",
                self.h0
            )));
        }
        if self.refinements < 2 {
            return Err(LineSearchError::Config(format!(
                "refinement count must be at least 2, got {}",
                self.refinements
            )));
        }
        Ok(())
    }

    pub fn call_budget(&self) -> u32 {
        self.refinements as u32 + 2
    }
}

/// Interpolating parabola through three samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaFit<T> {
    pub points: [(T, T); 3],
    /// Leading coefficient.
    pub curvature: T,
    /// `None` when the curvature is not safely positive.
    pub vertex: Option<T>,
}

/// Vertex of the parabola through `points` via divided differences.
pub fn parabola_min<T: Real>(points: [(T, T); 3]) -> Result<ParabolaFit<T>, LineSearchError> {
    let [(h0, f0), (h1, f1), (h2, f2)] = points;
    if h0 == h1 || h1 == h2 || h0 == h2 {
        return Err(LineSearchError::DuplicateAbscissa);
    }
    let d01 = (f1 - f0) / (h1 - h0);
    let d12 = (f2 - f1) / (h2 - h1);
    let curvature = (d12 - d01) / (h2 - h0);
    let scale = f0.abs().max(f1.abs()).max(f2.abs());
    let vertex = (curvature > T::zero() && curvature.abs() >= T::c(1e-12) * scale)
        .then(|| (h0 + h1) / T::c(2.0) - d01 / (T::c(2.0) * curvature))
        .filter(|v| v.is_finite());
    Ok(ParabolaFit {
        points,
        curvature,
        vertex,
    })
}

/// Vertex of the parabola with value `f0` and slope `slope` at 0 passing
/// through `(h1, f1)`.
fn slope_parabola_min<T: Real>(f0: T, slope: T, h1: T, f1: T) -> Option<T> {
    let curvature = (f1 - f0 - slope * h1) / (h1 * h1);
    let scale = f0.abs().max(f1.abs());
    if !(curvature > T::zero()) || curvature < T::c(1e-12) * scale {
        return None;
    }
    Some(-slope / (T::c(2.0) * curvature)).filter(|v| v.is_finite())
}

fn check_direction<T: Real>(r: &[T]) -> Result<(), LineSearchError> {
    let n = norm(r).to_f64_lossy();
    let tol = 1e-8f64.max(16.0 * T::epsilon().to_f64_lossy());
    if (n - 1.0).abs() > tol {
        return Err(LineSearchError::NotUnitDirection(n));
    }
    Ok(())
}

struct Probe<'o, 'a, T: Real> {
    oracle: &'o Oracle<'a, T>,
    x0: &'o [T],
    r: &'o [T],
    calls: u32,
}

impl<T: Real> Probe<'_, '_, T> {
    /// A probe whose value overflows counts as infinitely worse.
    fn at(&mut self, h: T) -> Result<T, LineSearchError> {
        self.calls += 1;
        match self.oracle.value(&offset(self.x0, h, self.r)) {
            Ok(f) => Ok(f),
            Err(OracleError::NonFinite) => Ok(T::infinity()),
            Err(e) => Err(e.into()),
        }
    }
}

/// Expansion/contraction search. `f0` must equal `f(x0)`.
pub fn ls_h<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    r: &[T],
    config: &LsHConfig,
    f0: T,
) -> Result<LineSearchResult<T>, LineSearchError> {
    config.validate()?;
    check_direction(r)?;
    let mut probe = Probe {
        oracle,
        x0,
        r,
        calls: 0,
    };
    let h0 = T::c(config.h0);
    let f_h0 = probe.at(h0)?;
    if f_h0 < f0 {
        let h1 = T::c(config.k_plus) * h0;
        let f_h1 = probe.at(h1)?;
        if f_h1 < f_h0 {
            return Ok(LineSearchResult::found(h1, f_h1, probe.calls));
        }
        return Ok(LineSearchResult::found(h0, f_h0, probe.calls));
    }
    let k_minus = T::c(config.k_minus);
    let eps_h = T::c(config.eps_h);
    let mut h = k_minus * h0;
    let mut f = probe.at(h)?;
    // equality is not a relaxation
    while !(f < f0) {
        h = k_minus * h;
        if h <= eps_h {
            return Ok(LineSearchResult::none(f0, probe.calls));
        }
        f = probe.at(h)?;
    }
    Ok(LineSearchResult::found(h, f, probe.calls))
}

/// Successive parabolic interpolation. `f0` must equal `f(x0)`; `g0` is the
/// gradient at `x0`, required when the gradient start is enabled.
pub fn ls_par<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    r: &[T],
    config: &LsParConfig,
    f0: T,
    g0: Option<&[T]>,
) -> Result<LineSearchResult<T>, LineSearchError> {
    config.validate()?;
    check_direction(r)?;
    let mut probe = Probe {
        oracle,
        x0,
        r,
        calls: 0,
    };
    let h0 = T::c(config.h0);
    let trust = T::c(10.0) * h0;
    let backward_allowed = !config.use_gradient_start;
    let mut points: Vec<(T, T)> = vec![(T::zero(), f0)];

    let mut stalled = false;
    if config.use_gradient_start {
        let g0 = g0.ok_or(LineSearchError::MissingGradient)?;
        let slope = dot(g0, r);
        let f1 = probe.at(h0)?;
        points.push((h0, f1));
        match slope_parabola_min(f0, slope, h0, f1) {
            Some(v) if v > T::zero() && v != h0 => {
                let v = v.min(trust);
                let f2 = probe.at(v)?;
                points.push((v, f2));
            }
            _ => stalled = true,
        }
    } else {
        let half = h0 / T::c(2.0);
        for h in [-half, half] {
            let f = probe.at(h)?;
            points.push((h, f));
        }
    }

    if !stalled {
        for _ in 2..=config.refinements {
            sort_by_value(&mut points);
            points.truncate(3);
            let fit = parabola_min([points[0], points[1], points[2]])?;
            let Some(v) = fit.vertex else { break };
            let v = if backward_allowed { v.max(-trust) } else { v }.min(trust);
            if (!backward_allowed && v <= T::zero()) || points.iter().any(|p| p.0 == v) {
                break;
            }
            let f = probe.at(v)?;
            points.push((v, f));
        }
    }

    sort_by_value(&mut points);
    let (h, f) = points[0];
    if f < f0 {
        Ok(LineSearchResult::found(h, f, probe.calls))
    } else {
        Ok(LineSearchResult::none(f0, probe.calls))
    }
}

/// Stable ascending sort by value.
fn sort_by_value<T: Real>(points: &mut [(T, T)]) {
    points.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal));
}

/// Closed-form minimizer along `r`, available for quadratic objectives.
pub fn ls_exact<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    r: &[T],
    f0: T,
) -> Result<LineSearchResult<T>, LineSearchError> {
    check_direction(r)?;
    let h = oracle
        .exact_line_step(x0, r)
        .ok_or(LineSearchError::ExactUnavailable)?;
    let f = oracle.value(&offset(x0, h, r))?;
    if f < f0 {
        Ok(LineSearchResult::found(h, f, 1))
    } else {
        Ok(LineSearchResult::none(f0, 1))
    }
}

/// Which one-dimensional search a descent method uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearch {
    H(LsHConfig),
    Par(LsParConfig),
    Exact,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch::Par(LsParConfig::default())
    }
}

impl LineSearch {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        match self {
            LineSearch::H(c) => c.validate(),
            LineSearch::Par(c) => c.validate(),
            LineSearch::Exact => Ok(()),
        }
    }

    pub fn initial_step(&self) -> Option<f64> {
        match self {
            LineSearch::H(c) => Some(c.h0),
            LineSearch::Par(c) => Some(c.h0),
            LineSearch::Exact => None,
        }
    }

    pub fn needs_gradient(&self) -> bool {
        matches!(self, LineSearch::Par(c) if c.use_gradient_start)
    }

    pub fn describe(&self) -> String {
        match self {
            LineSearch::H(c) => format!(
                "ls_h(h0={}, eps_h={}, k_plus={}, k_minus={})",
                c.h0, c.eps_h, c.k_plus, c.k_minus
            ),
            LineSearch::Par(c) => format!(
                "ls_par(h0={}, K={}, G0={})",
                c.h0, c.refinements, c.use_gradient_start
            ),
            LineSearch::Exact => "exact".to_string(),
        }
    }
}

/// A configured search that warm-starts from the previously accepted step.
///
/// When a warm-started search finds no relaxing step it is retried once
/// from the configured initial step before reporting failure.
#[derive(Debug, Clone)]
pub struct LineSearcher {
    method: LineSearch,
    warm_h0: Option<f64>,
}

impl LineSearcher {
    pub fn new(method: LineSearch) -> Result<Self, LineSearchError> {
        method.validate()?;
        Ok(Self {
            method,
            warm_h0: None,
        })
    }

    pub fn method(&self) -> &LineSearch {
        &self.method
    }

    pub fn reset(&mut self) {
        self.warm_h0 = None;
    }

    pub fn search<T: Real>(
        &mut self,
        oracle: &Oracle<'_, T>,
        x0: &[T],
        r: &[T],
        f0: T,
        g0: Option<&[T]>,
    ) -> Result<LineSearchResult<T>, LineSearchError> {
        let warm = self.warm_h0;
        let mut result = self.run(oracle, x0, r, f0, g0, warm)?;
        if !result.is_found() && warm.is_some() {
            let calls = result.oracle_calls;
            result = self.run(oracle, x0, r, f0, g0, None)?;
            result.oracle_calls += calls;
        }
        if result.is_found() {
            let h = result.step.abs().to_f64_lossy();
            if h > 0.0 && h.is_finite() {
                self.warm_h0 = Some(h);
            }
        }
        Ok(result)
    }

    fn run<T: Real>(
        &self,
        oracle: &Oracle<'_, T>,
        x0: &[T],
        r: &[T],
        f0: T,
        g0: Option<&[T]>,
        h0: Option<f64>,
    ) -> Result<LineSearchResult<T>, LineSearchError> {
        match self.method {
            LineSearch::H(mut c) => {
                if let Some(h) = h0 {
                    // keep the start above the termination threshold
                    c.h0 = h.max(c.eps_h / c.k_minus);
                }
                ls_h(oracle, x0, r, &c, f0)
            }
            LineSearch::Par(mut c) => {
                if let Some(h) = h0 {
                    c.h0 = h;
                }
                ls_par(oracle, x0, r, &c, f0, g0)
            }
            LineSearch::Exact => ls_exact(oracle, x0, r, f0),
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::oracle::test_objectives::{Diagonal, Scalar};

    fn quad_1d(c: f64, a: f64) -> Scalar<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
        Scalar(
            move |x: f64| a * (x - c) * (x - c),
            move |x: f64| 2.0 * a * (x - c),
        )
    }

    #[test]
    fn parabola_through_symmetric_points() {
        let fit = parabola_min([(0.0, 1.0), (1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert_eq!(fit.vertex, Some(1.0));
        assert_eq!(fit.curvature, 1.0);
    }

    #[test]
    fn collinear_points_have_no_vertex() {
        let fit = parabola_min([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(fit.vertex, None);
        let concave = parabola_min([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(concave.vertex, None);
    }

    #[test]
    fn duplicate_abscissa_is_an_error() {
        assert_eq!(
            parabola_min([(0.0, 0.0), (0.0, 1.0), (2.0, 2.0)]),
            Err(LineSearchError::DuplicateAbscissa)
        );
    }

    proptest! {
        #[test]
        fn parabola_recovers_constructed_vertex(
            a in 0.1f64..10.0,
            v in -5.0f64..5.0,
            c in -10.0f64..10.0,
            h in prop::array::uniform3(-3.0f64..3.0),
        ) {
            prop_assume!((h[0] - h[1]).abs() > 0.1 && (h[1] - h[2]).abs() > 0.1 && (h[0] - h[2]).abs() > 0.1);
            let f = |x: f64| a * (x - v) * (x - v) + c;
            let fit = parabola_min([(h[0], f(h[0])), (h[1], f(h[1])), (h[2], f(h[2]))]).unwrap();
            let got = fit.vertex.unwrap();
            prop_assert!((got - v).abs() <= 1e-12 * (1.0 + v.abs()) * 100.0, "{} vs {}", got, v);
        }
    }

    #[test]
    fn ls_h_expands_on_improvement() {
        // f(x) = x^2 from x0 = 1 along -1: f(0.5) = 0.25, then f(0) = 0
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let config = LsHConfig {
            h0: 0.5,
            eps_h: 1e-6,
            k_plus: 2.0,
            k_minus: 0.5,
        };
        let res = ls_h(&oracle, &[1.0], &[-1.0], &config, 1.0).unwrap();
        assert_eq!(
            (res.step, res.f, res.status),
            (1.0, 0.0, LineSearchStatus::Found)
        );
        assert_eq!(res.oracle_calls, 2);
        assert_eq!(oracle.value_calls(), 2);
    }

    #[test]
    fn ls_h_keeps_first_probe_when_expansion_is_worse() {
        // f(0.2) = 0.04 improves, f(-0.6) = 0.36 does not beat it
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let config = LsHConfig {
            h0: 0.8,
            eps_h: 1e-6,
            k_plus: 2.0,
            k_minus: 0.5,
        };
        let res = ls_h(&oracle, &[1.0], &[-1.0], &config, 1.0).unwrap();
        assert_eq!(res.step, 0.8);
        assert!((res.f - 0.04).abs() < 1e-15);
    }

    #[test]
    fn ls_h_contracts_until_relaxing() {
        // minimum at 0.9 from x0 = 1: h = 1, 0.5, 0.25 overshoot, h = 0.125 relaxes
        let obj = quad_1d(0.9, 1.0);
        let oracle = Oracle::new(&obj);
        let config = LsHConfig {
            h0: 1.0,
            eps_h: 1e-6,
            k_plus: 2.0,
            k_minus: 0.5,
        };
        let f0 = 0.01;
        let res = ls_h(&oracle, &[1.0], &[-1.0], &config, f0).unwrap();
        assert!(res.is_found());
        assert_eq!(res.step, 0.125);
        assert!(res.f < f0);
        assert_eq!(res.oracle_calls, 4);
    }

    #[test]
    fn ls_h_uphill_reports_no_relaxation() {
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let config = LsHConfig {
            h0: 1.0,
            eps_h: 1e-3,
            k_plus: 2.0,
            k_minus: 0.5,
        };
        let res = ls_h(&oracle, &[1.0], &[1.0], &config, 1.0).unwrap();
        assert_eq!(res.status, LineSearchStatus::NoRelaxation);
        assert_eq!((res.step, res.f), (0.0, 1.0));
        assert!(res.oracle_calls <= config.call_budget(1.0));
    }

    #[test]
    fn ls_par_symmetric_start_hits_vertex() {
        // f = (h-1)^2 along +1 from 0: samples at -0.5 and 0.5, vertex at 1
        let obj = quad_1d(1.0, 1.0);
        let oracle = Oracle::new(&obj);
        let config = LsParConfig {
            h0: 1.0,
            refinements: 2,
            use_gradient_start: false,
        };
        let res = ls_par(&oracle, &[0.0], &[1.0], &config, 1.0, None).unwrap();
        assert_eq!((res.step, res.f), (1.0, 0.0));
        assert_eq!(res.oracle_calls, 3);
    }

    #[test]
    fn ls_par_gradient_start_is_exact_on_quadratics() {
        let obj = quad_1d(2.7, 3.5);
        let oracle = Oracle::new(&obj);
        let config = LsParConfig {
            h0: 0.3,
            refinements: 2,
            use_gradient_start: true,
        };
        let x0 = [0.4];
        let f0 = oracle.value(&x0).unwrap();
        let g0 = oracle.gradient(&x0).unwrap();
        let res = ls_par(&oracle, &x0, &[1.0], &config, f0, Some(&g0)).unwrap();
        assert!((res.step - 2.3).abs() <= 1e-10 * 2.3, "{}", res.step);
    }

    #[test]
    fn ls_par_all_probes_worse() {
        // x0 is the minimizer, every probe is worse
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        for g0 in [true, false] {
            let config = LsParConfig {
                h0: 0.5,
                refinements: 4,
                use_gradient_start: g0,
            };
            let res = ls_par(&oracle, &[0.0], &[1.0], &config, 0.0, Some(&[0.0])).unwrap();
            assert_eq!(res.status, LineSearchStatus::NoRelaxation);
            assert_eq!((res.step, res.f), (0.0, 0.0));
        }
    }

    #[test]
    fn ls_par_requires_gradient_when_configured() {
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let res = ls_par(&oracle, &[1.0], &[-1.0], &LsParConfig::default(), 1.0, None);
        assert_eq!(res, Err(LineSearchError::MissingGradient));
    }

    #[test]
    fn unnormalized_direction_is_rejected() {
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let res = ls_h(&oracle, &[1.0], &[-2.0], &LsHConfig::default(), 1.0);
        assert!(matches!(res, Err(LineSearchError::NotUnitDirection(_))));
    }

    #[test]
    fn config_validation() {
        assert!(LsHConfig {
            k_plus: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LsHConfig {
            k_minus: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LsHConfig {
            eps_h: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LsParConfig {
            refinements: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LsParConfig {
            h0: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn exact_search_uses_closed_form() {
        let obj = Diagonal {
            d: vec![2.0, 8.0],
            c: vec![0.0, 0.0],
        };
        let oracle = Oracle::new(&obj);
        let x0 = [1.0, 0.0];
        let res = ls_exact(&oracle, &x0, &[-1.0, 0.0], 1.0).unwrap();
        assert_eq!((res.step, res.f), (1.0, 0.0));
    }

    #[test]
    fn warm_start_reuses_and_resets() {
        let obj = quad_1d(0.0, 1.0);
        let oracle = Oracle::new(&obj);
        let mut searcher = LineSearcher::new(LineSearch::H(LsHConfig {
            h0: 0.25,
            eps_h: 1e-6,
            k_plus: 2.0,
            k_minus: 0.5,
        }))
        .unwrap();
        let first = searcher
            .search(&oracle, &[4.0], &[-1.0], 16.0, None)
            .unwrap();
        assert_eq!(first.step, 0.5);
        // next call starts from 0.5 and expands to 1.0
        let second = searcher
            .search(&oracle, &[3.5], &[-1.0], 12.25, None)
            .unwrap();
        assert_eq!(second.step, 1.0);
        // a warm start of 1.0 fails uphill, the cold retry also fails
        let third = searcher.search(&oracle, &[0.0], &[1.0], 0.0, None).unwrap();
        assert_eq!(third.status, LineSearchStatus::NoRelaxation);
        let cfg = LsHConfig {
            h0: 0.25,
            eps_h: 1e-6,
            k_plus: 2.0,
            k_minus: 0.5,
        };
        assert!(third.oracle_calls <= cfg.call_budget(1.0) + cfg.call_budget(0.25));
    }

    /// Randomized one-dimensional restriction: a quartic with a random
    /// minimizer and random scale, possibly searched uphill.
    fn restriction(c: f64, a: f64, b: f64) -> Scalar<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
        Scalar(
            move |x: f64| a * (x - c).powi(2) + b * (x - c).powi(4),
            move |x: f64| 2.0 * a * (x - c) + 4.0 * b * (x - c).powi(3),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn ls_h_relaxes_within_budget(
            c in -5.0f64..5.0, a in 0.01f64..10.0, b in 0.0f64..2.0,
            x0 in -5.0f64..5.0, dir in prop::bool::ANY,
            h0 in 1e-3f64..10.0, k_plus in 1.1f64..4.0, k_minus in 0.1f64..0.9,
        ) {
            let obj = restriction(c, a, b);
            let oracle = Oracle::new(&obj);
            let r = [if dir { 1.0 } else { -1.0 }];
            let f0 = oracle.value(&[x0]).unwrap();
            let config = LsHConfig { h0, eps_h: 1e-8, k_plus, k_minus };
            let res = ls_h(&oracle, &[x0], &r, &config, f0).unwrap();
            prop_assert!(res.oracle_calls <= config.call_budget(h0));
            prop_assert_eq!(oracle.value_calls() as u32, res.oracle_calls + 1);
            match res.status {
                LineSearchStatus::Found => {
                    prop_assert!(res.f < f0);
                    prop_assert_eq!(res.f, oracle.value(&[x0 + res.step * r[0]]).unwrap());
                }
                LineSearchStatus::NoRelaxation => prop_assert_eq!((res.step, res.f), (0.0, f0)),
            }
        }

        #[test]
        fn ls_par_relaxes_within_budget(
            c in -5.0f64..5.0, a in 0.01f64..10.0, b in 0.0f64..2.0,
            x0 in -5.0f64..5.0, dir in prop::bool::ANY,
            h0 in 1e-3f64..10.0, k in 2usize..8, g0 in prop::bool::ANY,
        ) {
            let obj = restriction(c, a, b);
            let oracle = Oracle::new(&obj);
            let r = [if dir { 1.0 } else { -1.0 }];
            let (f0, g) = oracle.value_and_gradient(&[x0]).unwrap();
            let config = LsParConfig { h0, refinements: k, use_gradient_start: g0 };
            let res = ls_par(&oracle, &[x0], &r, &config, f0, Some(&g)).unwrap();
            prop_assert!(res.oracle_calls <= config.call_budget());
            prop_assert_eq!(oracle.value_calls() as u32, res.oracle_calls + 1);
            match res.status {
                LineSearchStatus::Found => prop_assert!(res.f < f0),
                LineSearchStatus::NoRelaxation => prop_assert_eq!((res.step, res.f), (0.0, f0)),
            }
        }

        #[test]
        fn ls_par_is_deterministic(c in -5.0f64..5.0, x0 in -5.0f64..5.0, h0 in 0.01f64..3.0) {
            let obj = restriction(c, 1.0, 0.5);
            let run = || {
                let oracle = Oracle::new(&obj);
                let (f0, g) = oracle.value_and_gradient(&[x0]).unwrap();
                let r = [if g[0] > 0.0 { -1.0 } else { 1.0 }];
                ls_par(&oracle, &[x0], &r, &LsParConfig { h0, refinements: 4, use_gradient_start: true }, f0, Some(&g))
            };
            prop_assert_eq!(run(), run());
        }
    }
}
