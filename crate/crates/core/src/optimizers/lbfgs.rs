//! Limited-memory BFGS.

use std::collections::VecDeque;

use super::{
    normalized, run_search, start_point, unit_antigradient, Driver, Minimization, OptimizerError,
    Status, StopCriteria,
};
use crate::linesearch::{LineSearch, LineSearcher};
use crate::oracle::Oracle;
use crate::real::{axpy, dot, norm, offset, Real};

/// The most recent `m` curvature pairs `(s, y, 1/<s,y>)`, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsMemory<T> {
    depth: usize,
    pairs: VecDeque<(Vec<T>, Vec<T>, T)>,
}

impl<T: Real> LbfgsMemory<T> {
    pub fn new(depth: usize) -> Result<Self, OptimizerError> {
        if depth == 0 {
            return Err(OptimizerError::Config(
                "LBFGS memory depth must be at least 1".into(),
            ));
        }
        Ok(Self {
            depth,
            pairs: VecDeque::with_capacity(depth),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores the pair when `<s,y> > 1e-12 |s| |y|`, evicting the oldest
    /// pair at capacity. Returns whether the pair was stored.
    pub fn push(&mut self, s: Vec<T>, y: Vec<T>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > T::c(1e-12) * norm(&s) * norm(&y)) || !sy.is_finite() {
            return false;
        }
        if self.pairs.len() == self.depth {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, T::one() / sy));
        true
    }
}

/// Two-loop recursion. Returns `-H g` with the initial matrix scaled by
/// `<s,y>/<y,y>` of the newest pair, or the unit antigradient when the
/// memory is empty.
pub fn lbfgs_direction<T: Real>(memory: &LbfgsMemory<T>, g: &[T]) -> Vec<T> {
    let Some((s_last, y_last, _)) = memory.pairs.back() else {
        return unit_antigradient(g).unwrap_or_else(|| vec![T::zero(); g.len()]);
    };
    let mut r: Vec<T> = g.iter().map(|&v| -v).collect();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.pairs.iter().rev() {
        let alpha = *rho * dot(s, &r);
        axpy(-alpha, y, &mut r);
        alphas.push(alpha);
    }
    let gamma = dot(s_last, y_last) / dot(y_last, y_last);
    r.iter_mut().for_each(|v| *v = *v * gamma);
    for ((s, y, rho), alpha) in memory.pairs.iter().zip(alphas.into_iter().rev()) {
        let beta = *rho * dot(y, &r);
        axpy(alpha - beta, s, &mut r);
    }
    r
}

pub fn lbfgs<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    depth: usize,
    linesearch: LineSearch,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    let mut memory = LbfgsMemory::new(depth)?;
    let mut searcher = LineSearcher::new(linesearch)?;
    let (mut f, mut g) = start_point(oracle, x0)?;
    let desc = format!("m={depth} {}", linesearch.describe());
    let mut driver = Driver::new(oracle, stop, "lbfgs", desc, x0, f, norm(&g));
    let mut x = x0.to_vec();
    let mut k = 0;
    loop {
        let gnorm = norm(&g);
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let mut direction = lbfgs_direction(&memory, &g);
        if !(dot(&direction, &g) < T::zero()) {
            memory.clear();
            direction = lbfgs_direction(&memory, &g);
        }
        let Some(r) = normalized(&direction) else {
            return Ok(driver.finish(Status::Converged, None));
        };
        let res = match run_search(&mut searcher, oracle, &x, &r, f, &g)? {
            Ok(res) => res,
            Err(e) => return Ok(driver.fail(e)),
        };
        if !res.is_found() {
            if !memory.is_empty() {
                memory.clear();
                continue;
            }
            k += 1;
            driver.record(k, f, gnorm, T::zero(), None);
            if driver.stop_on_linesearch_failure() {
                return Ok(driver.finish(Status::LinesearchFailure, None));
            }
            continue;
        }
        let x_new = offset(&x, res.step, &r);
        let g_new = match oracle.gradient(&x_new) {
            Ok(g) => g,
            Err(e) => return Ok(driver.fail(e)),
        };
        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        memory.push(s, y);
        x = x_new;
        f = res.f;
        g = g_new;
        k += 1;
        driver.offer(&x, f);
        driver.record(k, f, norm(&g), res.step, None);
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::check_trace;
    use super::super::GradientTolerance;
    use super::*;
    use crate::linesearch::LsParConfig;
    use crate::oracle::test_objectives::Diagonal;
    use crate::oracle::Objective;
    use crate::synthetic::{QuadraticInstance, Spectrum};

    #[test]
    fn empty_memory_gives_unit_antigradient() {
        let memory = LbfgsMemory::<f64>::new(3).unwrap();
        let d = lbfgs_direction(&memory, &[3.0, 4.0]);
        assert!((d[0] + 0.6).abs() < 1e-15 && (d[1] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn identity_pair_is_a_fixed_point() {
        let mut memory = LbfgsMemory::new(3).unwrap();
        assert!(memory.push(vec![1.0, 2.0, -1.0], vec![1.0, 2.0, -1.0]));
        let g = [0.3f64, -1.2, 2.0];
        let d = lbfgs_direction(&memory, &g);
        for (di, gi) in d.iter().zip(g.iter()) {
            assert!((di + gi).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_depth_is_rejected() {
        assert!(LbfgsMemory::<f64>::new(0).is_err());
    }

    #[test]
    fn memory_is_bounded_and_guarded() {
        let mut memory = LbfgsMemory::new(2).unwrap();
        assert!(!memory.push(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert!(!memory.push(vec![1.0, 0.0], vec![0.0, 1.0]));
        for i in 0..5 {
            memory.push(vec![1.0 + i as f64, 0.0], vec![1.0, 0.5]);
            assert!(memory.len() <= 2);
        }
        assert_eq!(memory.pairs.front().unwrap().0[0], 4.0);
    }

    /// Dense BFGS inverse-Hessian recursion from `H0 = gamma I`.
    fn dense_bfgs(pairs: &[(Vec<f64>, Vec<f64>)], gamma: f64) -> Vec<Vec<f64>> {
        let n = pairs[0].0.len();
        let mut h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { gamma } else { 0.0 }).collect())
            .collect();
        for (s, y) in pairs {
            let rho = 1.0 / s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let v: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (i == j) as u8 as f64 - rho * s[i] * y[j])
                        .collect()
                })
                .collect();
            let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                            .collect()
                    })
                    .collect()
            };
            let vt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| v[j][i]).collect()).collect();
            h = mul(&mul(&v, &h), &vt);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += rho * s[i] * s[j];
                }
            }
        }
        h
    }

    #[test]
    fn two_loop_matches_dense_bfgs() {
        let q = QuadraticInstance::random(4, Spectrum::Uniform { mu: 1.0, l: 30.0 }, 9);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = [
            [1.0, 0.2, -0.3, 0.5],
            [0.1, 1.0, 0.4, -0.2],
            [-0.5, 0.3, 1.0, 0.1],
        ]
        .iter()
        .map(|s| (s.to_vec(), q.hessian_times(s)))
        .collect();
        let mut memory = LbfgsMemory::new(3).unwrap();
        for (s, y) in &pairs {
            assert!(memory.push(s.clone(), y.clone()));
        }
        let (s, y) = pairs.last().unwrap();
        let gamma = dot(s, y) / dot(y, y);
        let h = dense_bfgs(&pairs, gamma);
        let g = [0.7, -1.1, 0.4, 2.0];
        let d = lbfgs_direction(&memory, &g);
        for i in 0..4 {
            let expected: f64 = -(0..4).map(|j| h[i][j] * g[j]).sum::<f64>();
            assert!(
                (d[i] - expected).abs() < 1e-10 * (1.0 + expected.abs()),
                "{} vs {}",
                d[i],
                expected
            );
        }
    }

    #[test]
    fn full_memory_after_exact_steps_inverts_the_hessian() {
        let q = QuadraticInstance::random(4, Spectrum::Uniform { mu: 1.0, l: 20.0 }, 17);
        let oracle = Oracle::new(&q);
        let mut memory = LbfgsMemory::new(4).unwrap();
        let mut x = q.x0.clone();
        let mut g = q.gradient(&x).unwrap();
        for _ in 0..4 {
            let r = normalized(&lbfgs_direction(&memory, &g)).unwrap();
            let h = oracle.exact_line_step(&x, &r).unwrap();
            let x_new = offset(&x, h, &r);
            let g_new = q.gradient(&x_new).unwrap();
            let s = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            assert!(memory.push(s, y));
            x = x_new;
            g = g_new;
        }
        let probe = [0.3, -0.8, 1.5, 0.2];
        let d = lbfgs_direction(&memory, &probe);
        let newton: Vec<f64> = q.solve(&probe).iter().map(|v| -v).collect();
        let cos = dot(&d, &newton) / (norm(&d) * norm(&newton));
        assert!((1.0 - cos).abs() < 1e-8, "cos = {cos}");
        assert!((norm(&d) / norm(&newton) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn converges_quickly_on_2d_quadratic() {
        let obj = Diagonal {
            d: vec![1.0, 25.0],
            c: vec![2.0, -1.0],
        };
        let oracle = Oracle::new(&obj);
        let stop =
            StopCriteria::iterations(10).with_gradient_tol(GradientTolerance::Absolute(1e-8));
        let ls = LineSearch::Par(LsParConfig::default());
        let res = lbfgs(&oracle, &[0.0, 0.0], 3, ls, &stop).unwrap();
        assert_eq!(
            res.status(),
            Status::Converged,
            "{:?}",
            res.trace.records.last()
        );
        for w in res.trace.records.windows(2) {
            assert!(w[1].f < w[0].f);
        }
        check_trace(&res.trace, &oracle);
    }
}
