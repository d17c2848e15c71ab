//! Coulomb and Lennard-Jones double sums as a reduction over the outer index.
//!
//! Energies use the half row `j > i`. Gradients use the full row `j != i`
//! and only write atom `i`, so rows never share output.

#[cfg(feature = "parallel")]
use super::Execution;
use super::{atom_pos, dot3, sub3, EnergyError, ForceField};
use crate::real::{pairwise_sum, Real};

#[derive(Clone, Copy)]
struct Row<T> {
    coulomb: T,
    vdw: T,
    grad: [T; 3],
}

/// Coulomb and LJ energy (plus force on `i` when `full`) for one pair at
/// separation `d = x_i - x_j`, squared length `r2`, weight `w`.
#[inline]
pub(crate) fn pair_terms<T: Real>(
    ff: &ForceField<T>,
    i: usize,
    j: usize,
    w: T,
    d: [T; 3],
    r2: T,
    want_grad: bool,
) -> (T, T, [T; 3]) {
    let r = r2.sqrt();
    let coulomb = ff.coulomb_constant * ff.charge[i] * ff.charge[j] * w / r;
    let sigma = ff.sqrt_sigma[i] * ff.sqrt_sigma[j];
    let eps4 = T::c(4.0) * w * ff.sqrt_epsilon[i] * ff.sqrt_epsilon[j];
    let s2 = sigma * sigma / r2;
    let sr6 = s2 * s2 * s2;
    let sr12 = sr6 * sr6;
    let vdw = eps4 * (sr12 - sr6);
    if !want_grad {
        return (coulomb, vdw, [T::zero(); 3]);
    }
    // (dE/dr) / r
    let de_over_r = (-coulomb + eps4 * (T::c(6.0) * sr6 - T::c(12.0) * sr12)) / r2;
    (
        coulomb,
        vdw,
        [d[0] * de_over_r, d[1] * de_over_r, d[2] * de_over_r],
    )
}

fn row<T: Real>(ff: &ForceField<T>, x: &[T], i: usize, full: bool) -> Result<Row<T>, EnergyError> {
    let n = ff.n_atoms();
    let start = if full { 0 } else { i + 1 };
    let special = &ff.special[i];
    let mut sp = special.partition_point(|&(p, _)| p < start);
    let cutoff2 = ff.cutoff.map(|c| c * c);
    let pi = atom_pos(x, i);
    let mut out = Row {
        coulomb: T::zero(),
        vdw: T::zero(),
        grad: [T::zero(); 3],
    };
    for j in start..n {
        if j == i {
            continue;
        }
        let mut w = T::one();
        if sp < special.len() && special[sp].0 == j {
            w = special[sp].1;
            sp += 1;
        }
        if w == T::zero() {
            continue;
        }
        let d = sub3(pi, atom_pos(x, j));
        let r2 = dot3(d, d);
        if let Some(c2) = cutoff2 {
            if r2 > c2 {
                continue;
            }
        }
        if r2 == T::zero() {
            return Err(EnergyError::CoincidentPair {
                i: i.min(j),
                j: i.max(j),
            });
        }
        let (c, v, g) = pair_terms(ff, i, j, w, d, r2, full);
        if j > i {
            out.coulomb = out.coulomb + c;
            out.vdw = out.vdw + v;
        }
        if full {
            out.grad = [out.grad[0] + g[0], out.grad[1] + g[1], out.grad[2] + g[2]];
        }
    }
    Ok(out)
}

fn rows<T: Real>(ff: &ForceField<T>, x: &[T], full: bool) -> Vec<Result<Row<T>, EnergyError>> {
    let n = ff.n_atoms();
    match ff.execution() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|i| row(ff, x, i, full))
                .collect()
        }
        _ => (0..n).map(|i| row(ff, x, i, full)).collect(),
    }
}

/// Returns `(coulomb, vdw, gradient)`; the gradient is `Some` iff requested.
pub(crate) fn evaluate<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    want_grad: bool,
) -> Result<(T, T, Option<Vec<T>>), EnergyError> {
    let results = rows(ff, x, want_grad);
    let mut coulomb = Vec::with_capacity(results.len());
    let mut vdw = Vec::with_capacity(results.len());
    let mut grad = want_grad.then(|| Vec::with_capacity(3 * results.len()));
    for r in results {
        let r = r?;
        coulomb.push(r.coulomb);
        vdw.push(r.vdw);
        if let Some(g) = grad.as_mut() {
            g.extend_from_slice(&r.grad);
        }
    }
    Ok((pairwise_sum(&coulomb), pairwise_sum(&vdw), grad))
}
