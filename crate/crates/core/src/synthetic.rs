//! Synthetic convex test problems with known minima.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::optimizers::ofgm_schedule;
use crate::oracle::{Objective, OracleError};

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// `mu`, `l` and `n - 2` eigenvalues drawn uniformly between them.
    Uniform {
        mu: f64,
        l: f64,
    },
    /// `mu (l/mu)^{i/(n-1)}`.
    Geometric {
        mu: f64,
        l: f64,
    },
    Explicit(Vec<f64>),
}

impl Spectrum {
    fn eigenvalues(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut values = match self {
            Spectrum::Uniform { mu, l } => (0..n)
                .map(|i| match i {
                    0 => *mu,
                    1 => *l,
                    _ => rng.gen_range(*mu..=*l),
                })
                .take(n)
                .collect::<Vec<_>>(),
            Spectrum::Geometric { mu, l } => (0..n)
                .map(|i| {
                    if n == 1 {
                        *l
                    } else {
                        mu * (l / mu).powf(i as f64 / (n - 1) as f64)
                    }
                })
                .collect(),
            Spectrum::Explicit(v) => v.clone(),
        };
        values.sort_by(f64::total_cmp);
        values
    }
}

/// `f(x) = 1/2 <A x, x> - <b, x> + c` with `c` chosen so that `f* = 0`.
///
/// Value and gradient are evaluated as `1/2 <A e, e>` and `A e` with
/// `e = x - x*`.
#[derive(Debug, Clone)]
pub struct QuadraticInstance {
    pub n: usize,
    /// Ascending.
    pub spectrum: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub eigenvectors: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub x0: Vec<f64>,
    /// `||x0 - x*||`.
    pub r: f64,
    /// `L / mu`; infinite when `mu = 0`.
    pub chi: f64,
}

impl QuadraticInstance {
    /// Random eigenbasis and minimizer; the start point is the origin.
    pub fn random(n: usize, spectrum: Spectrum, seed: u64) -> Self {
        assert!(n >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eig = spectrum.eigenvalues(n, &mut rng);
        assert_eq!(eig.len(), n, "spectrum length must equal n");
        assert!(eig[0] >= 0.0, "spectrum must be non-negative");
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = m.qr().q();
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::from_parts(eig, q, x_star, vec![0.0; n])
    }

    pub fn from_parts(
        spectrum: Vec<f64>,
        eigenvectors: DMatrix<f64>,
        x_star: Vec<f64>,
        x0: Vec<f64>,
    ) -> Self {
        let n = spectrum.len();
        let a = &eigenvectors
            * DMatrix::from_diagonal(&DVector::from_vec(spectrum.clone()))
            * eigenvectors.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let b = (&a * DVector::from_vec(x_star.clone())).as_slice().to_vec();
        let r = x0
            .iter()
            .zip(&x_star)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let chi = spectrum[n - 1] / spectrum[0];
        Self {
            n,
            spectrum,
            eigenvectors,
            a,
            b,
            x_star,
            f_star: 0.0,
            x0,
            r,
            chi,
        }
    }

    pub fn l(&self) -> f64 {
        self.spectrum[self.n - 1]
    }

    pub fn mu(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn hessian_times(&self, v: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }

    /// `A^{-1} v` through the eigendecomposition.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let q = &self.eigenvectors;
        let mut c = q.transpose() * DVector::from_column_slice(v);
        for (ci, lam) in c.iter_mut().zip(&self.spectrum) {
            *ci /= lam;
        }
        (q * c).as_slice().to_vec()
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let e: Vec<f64> = x.iter().zip(&self.x_star).map(|(a, b)| a - b).collect();
        self.hessian_times(&e)
    }

    pub fn gap_at(&self, x: &[f64]) -> f64 {
        let e: Vec<f64> = x.iter().zip(&self.x_star).map(|(a, b)| a - b).collect();
        0.5 * crate::real::dot(&self.hessian_times(&e), &e)
    }
}

impl Objective<f64> for QuadraticInstance {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(self.gap_at(x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(self.gradient_at(x))
    }

    fn exact_line_step(&self, x: &[f64], r: &[f64]) -> Option<f64> {
        let curvature = crate::real::dot(&self.hessian_times(r), r);
        (curvature > 0.0).then(|| -crate::real::dot(&self.gradient_at(x), r) / curvature)
    }
}

/// Quadratic inside the ball `||x|| < R / theta_N^2`, linear in `||x||`
/// outside; continuously differentiable across the seam. Minimum 0 at the
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseFunction {
    pub n: usize,
    pub l: f64,
    pub r: f64,
    pub horizon: usize,
    pub theta_n: f64,
}

impl WorstCaseFunction {
    pub fn new(n: usize, l: f64, r: f64, horizon: usize) -> Self {
        Self {
            n,
            l,
            r,
            horizon,
            theta_n: ofgm_schedule(horizon).theta_n,
        }
    }

    pub fn seam_radius(&self) -> f64 {
        self.r / (self.theta_n * self.theta_n)
    }

    /// `R e_1`, at distance `R` from the minimizer.
    pub fn start_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        x[0] = self.r;
        x
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let norm = crate::real::norm(x);
        let rho = self.seam_radius();
        if norm < rho {
            (
                0.5 * self.l * norm * norm,
                x.iter().map(|v| self.l * v).collect(),
            )
        } else {
            let slope = self.l * rho;
            (
                slope * norm - 0.5 * self.l * rho * rho,
                x.iter().map(|v| slope * v / norm).collect(),
            )
        }
    }
}

impl Objective<f64> for WorstCaseFunction {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(self.eval(x).0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(self.eval(x).1)
    }
}
