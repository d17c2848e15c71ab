use super::{
    run_search, start_point, unit_antigradient, Driver, Minimization, OptimizerError, Status,
    StopCriteria,
};
use crate::linesearch::{LineSearch, LineSearcher};
use crate::oracle::Oracle;
use crate::real::{norm, offset, Real};

/// Steepest descent: line search along the normalized antigradient.
pub fn steepest_descent<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    linesearch: LineSearch,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    let mut searcher = LineSearcher::new(linesearch)?;
    let (mut f, mut g) = start_point(oracle, x0)?;
    let mut driver = Driver::new(oracle, stop, "sd", linesearch.describe(), x0, f, norm(&g));
    let mut x = x0.to_vec();
    let mut k = 0;
    loop {
        let gnorm = norm(&g);
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let Some(r) = unit_antigradient(&g) else {
            return Ok(driver.finish(Status::Converged, None));
        };
        let res = match run_search(&mut searcher, oracle, &x, &r, f, &g)? {
            Ok(res) => res,
            Err(e) => return Ok(driver.fail(e)),
        };
        k += 1;
        if !res.is_found() {
            driver.record(k, f, gnorm, T::zero(), None);
            if driver.stop_on_linesearch_failure() {
                return Ok(driver.finish(Status::LinesearchFailure, None));
            }
            continue;
        }
        x = offset(&x, res.step, &r);
        f = res.f;
        g = match oracle.gradient(&x) {
            Ok(g) => g,
            Err(e) => return Ok(driver.fail(e)),
        };
        driver.offer(&x, f);
        driver.record(k, f, norm(&g), res.step, None);
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::check_trace;
    use super::super::{cg, CgConfig, CgVariant, GradientTolerance};
    use super::*;
    use crate::linesearch::{LsHConfig, LsParConfig};
    use crate::oracle::test_objectives::{Diagonal, Scalar};

    #[test]
    fn one_dimensional_quadratic_in_few_steps() {
        let obj = Scalar(
            |x: f64| 2.5 * (x - 3.0) * (x - 3.0),
            |x: f64| 5.0 * (x - 3.0),
        );
        let oracle = Oracle::new(&obj);
        let ls = LineSearch::Par(LsParConfig {
            h0: 1.0,
            refinements: 2,
            use_gradient_start: true,
        });
        let stop =
            StopCriteria::iterations(3).with_gradient_tol(GradientTolerance::Absolute(1e-12));
        let res = steepest_descent(&oracle, &[-4.0], ls, &stop).unwrap();
        assert!((res.x[0] - 3.0).abs() < 1e-8, "{:?}", res.x);
        assert!(res.trace.iterations() <= 3);
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn accepted_steps_strictly_decrease() {
        let obj = Diagonal {
            d: vec![1.0, 4.0, 9.0],
            c: vec![1.0, 2.0, 3.0],
        };
        let oracle = Oracle::new(&obj);
        let ls = LineSearch::H(LsHConfig::default());
        let res = steepest_descent(&oracle, &[0.0; 3], ls, &StopCriteria::iterations(200)).unwrap();
        for w in res.trace.records.windows(2) {
            if w[1].step != 0.0 {
                assert!(w[1].f < w[0].f);
            }
        }
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn slower_than_cg_on_ill_conditioned_quadratic() {
        let obj = Diagonal {
            d: vec![1.0, 100.0],
            c: vec![0.0, 0.0],
        };
        let stop =
            StopCriteria::iterations(100_000).with_gradient_tol(GradientTolerance::Absolute(1e-6));
        let x0 = [1.0, 1.0];
        let a = Oracle::new(&obj);
        let sd = steepest_descent(&a, &x0, LineSearch::Exact, &stop).unwrap();
        let b = Oracle::new(&obj);
        let cgr = cg(
            &b,
            &x0,
            CgConfig {
                variant: CgVariant::PolakRibierePolyak,
                restart: 100,
            },
            LineSearch::Exact,
            &stop,
        )
        .unwrap();
        assert_eq!(sd.status(), Status::Converged);
        assert_eq!(cgr.status(), Status::Converged);
        assert!(sd.trace.iterations() > cgr.trace.iterations());
    }

    #[test]
    fn linesearch_failure_is_reported() {
        // non-smooth kink at 0: a normalized step of any length overshoots once small enough
        let obj = Scalar(
            |x: f64| x.abs().sqrt(),
            |x: f64| 0.5 * x.signum() / x.abs().sqrt().max(1e-300),
        );
        let oracle = Oracle::new(&obj);
        let ls = LineSearch::H(LsHConfig {
            h0: 1.0,
            eps_h: 1e-3,
            k_plus: 2.0,
            k_minus: 0.5,
        });
        let res = steepest_descent(&oracle, &[0.7], ls, &StopCriteria::default()).unwrap();
        assert_eq!(res.status(), Status::LinesearchFailure);
    }
}
