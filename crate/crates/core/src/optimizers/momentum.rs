//! Fixed-step methods: gradient descent, heavy ball, Nesterov momentum.

use super::{start_point, Driver, Minimization, OptimizerError, StopCriteria};
use crate::oracle::Oracle;
use crate::real::{norm, Real};

/// Where the gradient of a momentum step is taken.
#[derive(Clone, Copy)]
enum GradientAt {
    /// `x_k` (heavy ball).
    Iterate,
    /// `x_k + c_k (x_k - x_{k-1})` (Nesterov).
    Extrapolated,
}

fn check_positive(name: &str, v: f64) -> Result<(), OptimizerError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(OptimizerError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// `x_{k+1} = x_k - g/L`.
pub fn gradient_descent_fixed<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    lipschitz: T,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    check_positive("L", lipschitz.to_f64_lossy())?;
    run(
        oracle,
        x0,
        stop,
        "gd",
        format!("L={lipschitz}"),
        T::one() / lipschitz,
        GradientAt::Iterate,
        |_| T::zero(),
    )
}

/// `x_{k+1} = x_k - alpha g(x_k) + beta (x_k - x_{k-1})`, `x_{-1} = x_0`.
pub fn heavy_ball<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    alpha: T,
    beta: T,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    check_positive("alpha", alpha.to_f64_lossy())?;
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(OptimizerError::Config(format!(
            "beta must be in [0,1), got {beta}"
        )));
    }
    run(
        oracle,
        x0,
        stop,
        "hb",
        format!("alpha={alpha} beta={beta}"),
        alpha,
        GradientAt::Iterate,
        |_| beta,
    )
}

/// Momentum form of the accelerated method with coefficient `(k-1)/(k+2)`,
/// `k` counted from 0.
pub fn nesterov_momentum<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    lipschitz: T,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    check_positive("L", lipschitz.to_f64_lossy())?;
    run(
        oracle,
        x0,
        stop,
        "nag",
        format!("L={lipschitz}"),
        T::one() / lipschitz,
        GradientAt::Extrapolated,
        |k| {
            let k = T::c(k as f64);
            (k - T::one()) / (k + T::c(2.0))
        },
    )
}

/// Strongly convex variant with constant coefficient
/// `(sqrt L - sqrt mu) / (sqrt L + sqrt mu)`.
pub fn nesterov_strongly_convex<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    lipschitz: T,
    mu: T,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    check_positive("mu", mu.to_f64_lossy())?;
    if !(lipschitz >= mu) {
        return Err(OptimizerError::Config(format!(
            "need L >= mu, got L={lipschitz} mu={mu}"
        )));
    }
    let (sl, sm) = (lipschitz.sqrt(), mu.sqrt());
    let c = (sl - sm) / (sl + sm);
    run(
        oracle,
        x0,
        stop,
        "nag-sc",
        format!("L={lipschitz} mu={mu}"),
        T::one() / lipschitz,
        GradientAt::Extrapolated,
        move |_| c,
    )
}

#[allow(clippy::too_many_arguments)]
fn run<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    stop: &StopCriteria,
    method: &str,
    config: String,
    step: T,
    at: GradientAt,
    coefficient: impl Fn(usize) -> T,
) -> Result<Minimization<T>, OptimizerError> {
    let (f0, g0) = start_point(oracle, x0)?;
    let mut gnorm = norm(&g0);
    let mut driver = Driver::new(oracle, stop, method, config, x0, f0, gnorm);
    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut g = g0;
    let mut k = 0;
    loop {
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let c = coefficient(k);
        let (x_next, f_next, step_len) = match at {
            GradientAt::Iterate => {
                let x_next: Vec<T> = (0..x.len())
                    .map(|i| x[i] - step * g[i] + c * (x[i] - x_prev[i]))
                    .collect();
                let (f, g_next) = match oracle.value_and_gradient(&x_next) {
                    Ok(v) => v,
                    Err(e) => return Ok(driver.fail(e)),
                };
                gnorm = norm(&g_next);
                let step_len = step * norm(&g);
                g = g_next;
                (x_next, f, step_len)
            }
            GradientAt::Extrapolated => {
                let y: Vec<T> = (0..x.len())
                    .map(|i| x[i] + c * (x[i] - x_prev[i]))
                    .collect();
                let (fy, gy) = match oracle.value_and_gradient(&y) {
                    Ok(v) => v,
                    Err(e) => return Ok(driver.fail(e)),
                };
                driver.offer(&y, fy);
                gnorm = norm(&gy);
                if let Some(status) = driver.check(k, gnorm) {
                    return Ok(driver.finish(status, None));
                }
                let x_next: Vec<T> = y.iter().zip(&gy).map(|(&yi, &gi)| yi - step * gi).collect();
                let f = match oracle.value(&x_next) {
                    Ok(v) => v,
                    Err(e) => return Ok(driver.fail(e)),
                };
                (x_next, f, step * gnorm)
            }
        };
        driver.offer(&x_next, f_next);
        k += 1;
        driver.record(k, f_next, gnorm, step_len, None);
        if driver.diverged(f_next) {
            return Ok(driver.finish(super::Status::Diverged, Some(format!("f = {f_next}"))));
        }
        x_prev = std::mem::replace(&mut x, x_next);
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::check_trace;
    use super::super::{GradientTolerance, Status};
    use super::*;
    use crate::oracle::test_objectives::Diagonal;

    fn ill_conditioned() -> Diagonal {
        Diagonal {
            d: vec![1.0, 10.0, 100.0],
            c: vec![1.0, -2.0, 0.5],
        }
    }

    #[test]
    fn gd_is_exact_on_identity_quadratic() {
        let obj = Diagonal {
            d: vec![1.0; 3],
            c: vec![0.0; 3],
        };
        let oracle = Oracle::new(&obj);
        let res = gradient_descent_fixed(&oracle, &[3.0, -1.0, 2.0], 1.0, &StopCriteria::default())
            .unwrap();
        assert_eq!(res.x, vec![0.0; 3]);
        assert_eq!(res.status(), Status::Converged);
        assert_eq!(res.trace.iterations(), 1);
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn heavy_ball_without_momentum_is_gd() {
        let obj = ill_conditioned();
        let stop = StopCriteria::iterations(50);
        let a = Oracle::new(&obj);
        let gd = gradient_descent_fixed(&a, &[0.0; 3], 100.0, &stop).unwrap();
        let b = Oracle::new(&obj);
        let hb = heavy_ball(&b, &[0.0; 3], 1.0 / 100.0, 0.0, &stop).unwrap();
        let fs = |m: &Minimization<f64>| m.trace.records.iter().map(|r| r.f).collect::<Vec<_>>();
        assert_eq!(fs(&gd), fs(&hb));
        assert_eq!(gd.x, hb.x);
    }

    #[test]
    fn tuned_heavy_ball_beats_gd() {
        let obj = ill_conditioned();
        let (l, mu): (f64, f64) = (100.0, 1.0);
        let stop =
            StopCriteria::iterations(100_000).with_gradient_tol(GradientTolerance::Absolute(1e-8));
        let a = Oracle::new(&obj);
        let gd = gradient_descent_fixed(&a, &[0.0; 3], l, &stop).unwrap();
        let alpha = 4.0 / (l.sqrt() + mu.sqrt()).powi(2);
        let beta = ((l.sqrt() - mu.sqrt()) / (l.sqrt() + mu.sqrt())).powi(2);
        let b = Oracle::new(&obj);
        let hb = heavy_ball(&b, &[0.0; 3], alpha, beta, &stop).unwrap();
        assert_eq!(gd.status(), Status::Converged);
        assert_eq!(hb.status(), Status::Converged);
        assert!(
            hb.trace.iterations() < gd.trace.iterations(),
            "{} vs {}",
            hb.trace.iterations(),
            gd.trace.iterations()
        );
    }

    #[test]
    fn minimizer_is_stationary() {
        let obj = ill_conditioned();
        let c = obj.c.clone();
        let stop = StopCriteria::iterations(5).with_gradient_tol(GradientTolerance::Absolute(0.0));
        for run in 0..3 {
            let oracle = Oracle::new(&obj);
            let res = match run {
                0 => heavy_ball(&oracle, &c, 0.01, 0.5, &stop),
                1 => nesterov_momentum(&oracle, &c, 100.0, &stop),
                _ => nesterov_strongly_convex(&oracle, &c, 100.0, 1.0, &stop),
            }
            .unwrap();
            assert_eq!(res.x, c);
            assert!(res.trace.records.iter().all(|r| r.f == 0.0));
        }
    }

    #[test]
    fn nesterov_first_step_is_a_gradient_step() {
        let obj = ill_conditioned();
        let x0 = [0.3, 0.2, 0.1];
        let stop = StopCriteria::iterations(1);
        let a = Oracle::new(&obj);
        let nag = nesterov_momentum(&a, &x0, 100.0, &stop).unwrap();
        let b = Oracle::new(&obj);
        let gd = gradient_descent_fixed(&b, &x0, 100.0, &stop).unwrap();
        assert_eq!(nag.trace.records[1].f, gd.trace.records[1].f);
    }

    #[test]
    fn strongly_convex_with_mu_equal_l_is_gd() {
        let obj = ill_conditioned();
        let stop = StopCriteria::iterations(30);
        let a = Oracle::new(&obj);
        let sc = nesterov_strongly_convex(&a, &[0.0; 3], 100.0, 100.0, &stop).unwrap();
        let b = Oracle::new(&obj);
        let gd = gradient_descent_fixed(&b, &[0.0; 3], 100.0, &stop).unwrap();
        let fs = |m: &Minimization<f64>| m.trace.records.iter().map(|r| r.f).collect::<Vec<_>>();
        assert_eq!(fs(&sc), fs(&gd));
    }

    #[test]
    fn divergence_is_detected() {
        let obj = ill_conditioned();
        let oracle = Oracle::new(&obj);
        // step 3/L overshoots on the stiff axis
        let res = gradient_descent_fixed(&oracle, &[0.0; 3], 100.0 / 3.0, &StopCriteria::default())
            .unwrap();
        assert_eq!(res.status(), Status::Diverged);
        check_trace(&res.trace, &oracle);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let obj = ill_conditioned();
        let oracle = Oracle::new(&obj);
        let stop = StopCriteria::default();
        assert!(gradient_descent_fixed(&oracle, &[0.0; 3], 0.0, &stop).is_err());
        assert!(heavy_ball(&oracle, &[0.0; 3], 0.1, 1.0, &stop).is_err());
        assert!(nesterov_strongly_convex(&oracle, &[0.0; 3], 1.0, 2.0, &stop).is_err());
    }
}
