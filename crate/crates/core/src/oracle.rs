//! First-order oracle interface shared by every optimizer.

use std::cell::Cell;

use thiserror::Error;

use crate::energy::{EnergyError, ForceField};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("objective returned a non-finite value")]
    NonFinite,
    #[error("expected a point of dimension {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

/// A smooth objective `f: R^n -> R`.
pub trait Objective<T: Real> {
    fn dimension(&self) -> usize;

    fn value(&self, x: &[T]) -> Result<T, OracleError>;

    fn gradient(&self, x: &[T]) -> Result<Vec<T>, OracleError>;

    fn value_and_gradient(&self, x: &[T]) -> Result<(T, Vec<T>), OracleError> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Minimizer of `h -> f(x + h r)` when the objective can compute it in
    /// closed form (quadratics). Used by the exact line-search mode.
    fn exact_line_step(&self, _x: &[T], _r: &[T]) -> Option<T> {
        None
    }
}

/// Counts calls into an objective. A combined value-and-gradient request
/// counts once in each counter.
pub struct Oracle<'a, T: Real> {
    objective: &'a dyn Objective<T>,
    value_calls: Cell<u64>,
    grad_calls: Cell<u64>,
}

impl<'a, T: Real> Oracle<'a, T> {
    pub fn new(objective: &'a dyn Objective<T>) -> Self {
        Self {
            objective,
            value_calls: Cell::new(0),
            grad_calls: Cell::new(0),
        }
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    pub fn value_calls(&self) -> u64 {
        self.value_calls.get()
    }

    pub fn grad_calls(&self) -> u64 {
        self.grad_calls.get()
    }

    pub fn total_calls(&self) -> u64 {
        self.value_calls() + self.grad_calls()
    }

    fn check_dim(&self, x: &[T]) -> Result<(), OracleError> {
        let expected = self.dimension();
        if x.len() != expected {
            return Err(OracleError::Dimension {
                expected,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[T]) -> Result<T, OracleError> {
        self.check_dim(x)?;
        self.value_calls.set(self.value_calls.get() + 1);
        let f = self.objective.value(x)?;
        if !f.is_finite() {
            return Err(OracleError::NonFinite);
        }
        Ok(f)
    }

    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>, OracleError> {
        self.check_dim(x)?;
        self.grad_calls.set(self.grad_calls.get() + 1);
        let g = self.objective.gradient(x)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite);
        }
        Ok(g)
    }

    pub fn value_and_gradient(&self, x: &[T]) -> Result<(T, Vec<T>), OracleError> {
        self.check_dim(x)?;
        self.value_calls.set(self.value_calls.get() + 1);
        self.grad_calls.set(self.grad_calls.get() + 1);
        let (f, g) = self.objective.value_and_gradient(x)?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite);
        }
        Ok((f, g))
    }

    /// Not counted: only available for objectives with a closed-form
    /// line minimizer.
    pub fn exact_line_step(&self, x: &[T], r: &[T]) -> Option<T> {
        self.objective.exact_line_step(x, r)
    }
}

/// Total force-field energy as a function of the flat coordinate vector.
pub struct MolecularObjective<T: Real> {
    pub force_field: ForceField<T>,
}

impl<T: Real> MolecularObjective<T> {
    pub fn new(force_field: ForceField<T>) -> Self {
        Self { force_field }
    }
}

impl<T: Real> Objective<T> for MolecularObjective<T> {
    fn dimension(&self) -> usize {
        self.force_field.dimension()
    }

    fn value(&self, x: &[T]) -> Result<T, OracleError> {
        Ok(self.force_field.total(x)?)
    }

    fn gradient(&self, x: &[T]) -> Result<Vec<T>, OracleError> {
        Ok(self.force_field.gradient(x)?)
    }

    fn value_and_gradient(&self, x: &[T]) -> Result<(T, Vec<T>), OracleError> {
        let (e, g) = self.force_field.energy_and_gradient(x)?;
        Ok((e.total(), g))
    }
}
