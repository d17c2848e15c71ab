//! Fast gradient method with best-point tracking, and the optimized
//! fixed-horizon variant.

use super::{
    normalized, run_search, start_point, unit_antigradient, Driver, Minimization, OptimizerError,
    Status, StopCriteria,
};
use crate::linesearch::{LineSearch, LineSearcher};
use crate::oracle::Oracle;
use crate::real::{norm, offset, Real};

/// `theta_k = 0.5 theta_{k-1} (sqrt(theta_{k-1}^2 + 4) - theta_{k-1})`.
pub fn fgm_theta(prev: f64) -> f64 {
    0.5 * prev * ((prev * prev + 4.0).sqrt() - prev)
}

fn fgm_beta(prev: f64, cur: f64) -> f64 {
    prev * (1.0 - prev) / (prev * prev + cur)
}

pub fn fgm<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    linesearch: LineSearch,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    let mut searcher = LineSearcher::new(linesearch)?;
    let (f0, g0) = start_point(oracle, x0)?;
    let mut driver = Driver::new(
        oracle,
        stop,
        "fgm",
        linesearch.describe(),
        x0,
        f0,
        norm(&g0),
    );
    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut theta_prev = 1.0;
    let mut gnorm = norm(&g0);
    let mut k = 0;
    let mut w_eval = Some((f0, g0));
    loop {
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let theta = fgm_theta(theta_prev);
        let beta = T::c(fgm_beta(theta_prev, theta));
        theta_prev = theta;
        let w: Vec<T> = x
            .iter()
            .zip(&x_prev)
            .map(|(&a, &b)| a + beta * (a - b))
            .collect();
        let (fw, gw) = match w_eval.take() {
            Some(v) if beta == T::zero() || x == x_prev => v,
            _ => match oracle.value_and_gradient(&w) {
                Ok(v) => v,
                Err(e) => return Ok(driver.fail(e)),
            },
        };
        driver.offer(&w, fw);
        gnorm = norm(&gw);
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let Some(r) = unit_antigradient(&gw) else {
            return Ok(driver.finish(Status::Converged, None));
        };
        let res = match run_search(&mut searcher, oracle, &w, &r, fw, &gw)? {
            Ok(res) => res,
            Err(e) => return Ok(driver.fail(e)),
        };
        k += 1;
        if !res.is_found() {
            driver.record(k, fw, gnorm, T::zero(), None);
            if driver.stop_on_linesearch_failure() {
                return Ok(driver.finish(Status::LinesearchFailure, None));
            }
            x_prev = x.clone();
            x = w;
            continue;
        }
        let x_next = offset(&w, res.step, &r);
        driver.offer(&x_next, res.f);
        driver.record(k, res.f, gnorm, res.step, None);
        x_prev = std::mem::replace(&mut x, x_next);
    }
}

/// Step sequence of the optimized method for a fixed horizon `N`:
/// `t_0 = 1`, `t_{k+1} = (1 + sqrt(4 t_k^2 + 1)) / 2` for `k < N-1`, and the
/// last coefficient `theta_N = (1 + sqrt(8 t_{N-1}^2 + 1)) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfgmSchedule {
    /// `t_0 .. t_{N-1}`.
    pub t: Vec<f64>,
    pub theta_n: f64,
}

impl OfgmSchedule {
    pub fn horizon(&self) -> usize {
        self.t.len()
    }

    /// Coefficient used in step `k -> k+1`, `k < N`.
    pub fn step_coefficient(&self, k: usize) -> f64 {
        if k + 1 < self.t.len() {
            self.t[k + 1]
        } else {
            self.theta_n
        }
    }

    /// `2 L R^2 / theta_N^2`.
    pub fn bound(&self, l: f64, r: f64) -> f64 {
        2.0 * l * r * r / (self.theta_n * self.theta_n)
    }
}

pub fn ofgm_schedule(horizon: usize) -> OfgmSchedule {
    assert!(horizon >= 1, "horizon must be at least 1");
    let mut t = vec![1.0];
    while t.len() < horizon {
        let last: f64 = *t.last().unwrap();
        t.push((1.0 + (4.0 * last * last + 1.0).sqrt()) / 2.0);
    }
    let last: f64 = *t.last().unwrap();
    OfgmSchedule {
        t,
        theta_n: (1.0 + (8.0 * last * last + 1.0).sqrt()) / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OfgmStep<T> {
    /// `x^{k+1} = y^{k+1} - d^{k+1} / L`.
    FixedL(T),
    /// Line search from `y^{k+1}` along `-d^{k+1}` in place of the `1/L` step.
    LineSearch(LineSearch),
}

/// Runs exactly `horizon` steps unless an earlier stop criterion fires.
pub fn ofgm<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    step: OfgmStep<T>,
    horizon: usize,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    if horizon == 0 {
        return Err(OptimizerError::Config(
            "OFGM horizon must be at least 1".into(),
        ));
    }
    let (mut searcher, desc) = match step {
        OfgmStep::FixedL(l) => {
            let lf = l.to_f64_lossy();
            if !(lf > 0.0 && lf.is_finite()) {
                return Err(OptimizerError::Config(format!(
                    "L must be positive, got {lf}"
                )));
            }
            (None, format!("N={horizon} L={l}"))
        }
        OfgmStep::LineSearch(ls) => (
            Some(LineSearcher::new(ls)?),
            format!("N={horizon} {}", ls.describe()),
        ),
    };
    let schedule = ofgm_schedule(horizon);
    let (f0, g0) = start_point(oracle, x0)?;
    let mut driver = Driver::new(oracle, stop, "ofgm", desc, x0, f0, norm(&g0));
    let mut x = x0.to_vec();
    let mut f = f0;
    let mut g = g0;
    // running sum_{j<=k} t_j grad f(x^j)
    let mut weighted: Vec<T> = g.iter().map(|&v| v * T::c(schedule.t[0])).collect();
    for k in 0..horizon {
        let gnorm = norm(&g);
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let t = T::c(schedule.step_coefficient(k));
        let keep = T::one() - T::one() / t;
        let y: Vec<T> = x.iter().zip(x0).map(|(&a, &b)| keep * a + b / t).collect();
        let d: Vec<T> = g
            .iter()
            .zip(&weighted)
            .map(|(&gi, &si)| keep * gi + T::c(2.0) / t * si)
            .collect();
        let (x_next, step_len) = match (&mut searcher, step) {
            (None, OfgmStep::FixedL(l)) => {
                let x_next: Vec<T> = y.iter().zip(&d).map(|(&yi, &di)| yi - di / l).collect();
                (x_next, norm(&d) / l)
            }
            (Some(searcher), _) => {
                let fy = match oracle.value(&y) {
                    Ok(v) => v,
                    Err(e) => return Ok(driver.fail(e)),
                };
                driver.offer(&y, fy);
                let Some(r) = normalized(&d).map(|d| d.iter().map(|&v| -v).collect::<Vec<T>>())
                else {
                    return Ok(driver.finish(Status::Converged, None));
                };
                // the search needs no gradient unless it builds a slope start
                let gy = if linesearch_needs_gradient(step) {
                    match oracle.gradient(&y) {
                        Ok(v) => Some(v),
                        Err(e) => return Ok(driver.fail(e)),
                    }
                } else {
                    None
                };
                let res = match searcher.search(oracle, &y, &r, fy, gy.as_deref()) {
                    Ok(res) => res,
                    Err(crate::linesearch::LineSearchError::Oracle(e)) => return Ok(driver.fail(e)),
                    Err(e) => return Err(e.into()),
                };
                if !res.is_found() {
                    driver.record(k + 1, f, gnorm, T::zero(), None);
                    if driver.stop_on_linesearch_failure() {
                        return Ok(driver.finish(Status::LinesearchFailure, None));
                    }
                    (y, T::zero())
                } else {
                    (offset(&y, res.step, &r), res.step)
                }
            }
            _ => unreachable!(),
        };
        let (f_next, g_next) = match oracle.value_and_gradient(&x_next) {
            Ok(v) => v,
            Err(e) => return Ok(driver.fail(e)),
        };
        if k + 1 < horizon {
            let tk = T::c(schedule.t[k + 1]);
            for (s, &gi) in weighted.iter_mut().zip(&g_next) {
                *s = *s + tk * gi;
            }
        }
        x = x_next;
        f = f_next;
        g = g_next;
        driver.offer(&x, f);
        driver.record(k + 1, f, norm(&g), step_len, None);
        if driver.diverged(f) {
            return Ok(driver.finish(Status::Diverged, Some(format!("f = {f}"))));
        }
    }
    // the bound is stated for the last iterate, so report it rather than the best point
    let mut out = driver.finish(Status::IterationBudget, None);
    if norm(&g) <= T::c(stop.gradient_tol.threshold(out.trace.records[0].grad_norm)) {
        out.trace.status = Status::Converged;
    }
    out.x = x;
    out.f = f;
    Ok(out)
}

fn linesearch_needs_gradient<T>(step: OfgmStep<T>) -> bool {
    matches!(step, OfgmStep::LineSearch(ls) if ls.needs_gradient())
}

#[cfg(test)]
mod tests {
    use super::super::test_support::check_trace;
    use super::super::GradientTolerance;
    use super::*;
    use crate::linesearch::LsParConfig;
    use crate::oracle::test_objectives::Diagonal;
    use crate::oracle::Objective;
    use crate::synthetic::{QuadraticInstance, Spectrum, WorstCaseFunction};

    #[test]
    fn first_theta_is_the_golden_section() {
        assert!((fgm_theta(1.0) - 0.6180339887498949).abs() < 1e-15);
        assert_eq!(fgm_beta(1.0, fgm_theta(1.0)), 0.0);
    }

    #[test]
    fn theta_strictly_decreases_in_unit_interval() {
        let mut theta = 1.0;
        for _ in 0..10_000 {
            let next = fgm_theta(theta);
            assert!(next > 0.0 && next < 1.0 && next < theta);
            theta = next;
        }
    }

    #[test]
    fn schedule_matches_hand_values() {
        let s = ofgm_schedule(3);
        assert_eq!(s.t[0], 1.0);
        assert!((s.t[1] - 1.6180339887498949).abs() < 1e-15);
        let t2 = (1.0 + (4.0 * s.t[1] * s.t[1] + 1.0).sqrt()) / 2.0;
        assert_eq!(s.t[2], t2);
        assert_eq!(s.theta_n, (1.0 + (8.0 * t2 * t2 + 1.0).sqrt()) / 2.0);
        assert_eq!(ofgm_schedule(1).theta_n, (1.0 + 3.0) / 2.0);
    }

    #[test]
    fn bound_is_below_lr2_over_n2() {
        for n in [1, 2, 5, 10, 100, 1000] {
            let s = ofgm_schedule(n);
            assert!(s.bound(1.0, 1.0) / 4.0 <= 1.0 / (n * n) as f64);
        }
    }

    #[test]
    fn fgm_first_step_is_steepest_descent() {
        let obj = Diagonal {
            d: vec![1.0, 10.0],
            c: vec![1.0, 1.0],
        };
        let ls = LineSearch::Exact;
        let stop = StopCriteria::iterations(1);
        let a = Oracle::new(&obj);
        let f = fgm(&a, &[0.0, 0.0], ls, &stop).unwrap();
        let b = Oracle::new(&obj);
        let s = super::super::steepest_descent(&b, &[0.0, 0.0], ls, &stop).unwrap();
        assert_eq!(f.x, s.x);
    }

    #[test]
    fn fgm_tracks_the_best_point() {
        let obj = Diagonal {
            d: vec![1.0, 50.0, 400.0],
            c: vec![1.0, -1.0, 0.3],
        };
        let oracle = Oracle::new(&obj);
        let ls = LineSearch::Par(LsParConfig::default());
        let stop =
            StopCriteria::iterations(300).with_gradient_tol(GradientTolerance::Absolute(1e-9));
        let res = fgm(&oracle, &[0.0; 3], ls, &stop).unwrap();
        let min_f = res
            .trace
            .records
            .iter()
            .map(|r| r.f)
            .fold(f64::INFINITY, f64::min);
        assert!(res.f <= min_f);
        assert_eq!(res.f, obj.value(&res.x).unwrap());
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn ofgm_meets_its_bound_on_quadratics() {
        for seed in 0..5 {
            let q = QuadraticInstance::random(30, Spectrum::Uniform { mu: 0.0, l: 10.0 }, seed);
            for n in [8, 16, 32] {
                let oracle = Oracle::new(&q);
                let stop =
                    StopCriteria::iterations(n).with_gradient_tol(GradientTolerance::Absolute(0.0));
                let res = ofgm(&oracle, &q.x0, OfgmStep::FixedL(q.l()), n, &stop).unwrap();
                let gap = res.f - q.f_star;
                assert!(
                    gap <= ofgm_schedule(n).bound(q.l(), q.r) * 1.0000001,
                    "seed {seed} N {n}"
                );
                check_trace(&res.trace, &oracle);
            }
        }
    }

    #[test]
    fn ofgm_attains_half_bound_on_worst_case() {
        for n in [4, 16] {
            let w = WorstCaseFunction::new(8, 1.0, 1.0, n);
            let oracle = Oracle::new(&w);
            let stop =
                StopCriteria::iterations(n).with_gradient_tol(GradientTolerance::Absolute(0.0));
            let res = ofgm(&oracle, &w.start_point(), OfgmStep::FixedL(1.0), n, &stop).unwrap();
            let ratio = res.f / ofgm_schedule(n).bound(1.0, 1.0);
            assert!((ratio - 0.25).abs() < 1e-9, "ratio {ratio}");
        }
    }

    #[test]
    fn ofgm_linesearch_mode_decreases() {
        let q = QuadraticInstance::random(10, Spectrum::Uniform { mu: 1.0, l: 10.0 }, 2);
        let oracle = Oracle::new(&q);
        let stop = StopCriteria::iterations(50).with_gradient_tol(GradientTolerance::Absolute(0.0));
        let res = ofgm(
            &oracle,
            &q.x0,
            OfgmStep::LineSearch(LineSearch::Exact),
            50,
            &stop,
        )
        .unwrap();
        assert!(res.f < q.value(&q.x0).unwrap() * 1e-3);
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn ofgm_rejects_zero_horizon() {
        let obj = Diagonal {
            d: vec![1.0],
            c: vec![0.0],
        };
        let oracle = Oracle::new(&obj);
        assert!(ofgm(
            &oracle,
            &[1.0],
            OfgmStep::FixedL(1.0),
            0,
            &StopCriteria::default()
        )
        .is_err());
    }
}
