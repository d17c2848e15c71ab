use super::{EnergyError, ForceField};
use crate::real::Real;

/// Central differences of the total energy, one coordinate at a time.
pub fn finite_difference_gradient<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    step: T,
) -> Result<Vec<T>, EnergyError> {
    assert!(step > T::zero(), "finite-difference step must be positive");
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for c in 0..x.len() {
        probe[c] = x[c] + step;
        let plus = ff.total(&probe)?;
        probe[c] = x[c] - step;
        let minus = ff.total(&probe)?;
        probe[c] = x[c];
        grad.push((plus - minus) / (T::c(2.0) * step));
    }
    Ok(grad)
}
