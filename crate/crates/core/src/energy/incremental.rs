//! Single-atom energy differences with a near/far Coulomb split.
//!
//! For a chosen atom the Coulomb sum over atoms outside a cutoff ball is
//! replaced by its first-order Taylor expansion in the atom's displacement,
//! `C·delta`. The coefficients cost O(n) once; every subsequent trial
//! displacement costs O(|near set| + bonded terms of the atom).

use super::bonded::{angle_term, bond_term, dihedral_term};
use super::nonbonded::pair_terms;
use super::{atom_pos, dot3, sub3, Angle, Bond, Dihedral, EnergyError, ForceField};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldLinearization<T> {
    pub atom: usize,
    /// Atoms treated exactly: inside the cutoff ball at the reference
    /// position, plus every excluded or 1-4 partner. Sorted.
    pub near_set: Vec<usize>,
    /// Gradient of the far-field Coulomb energy w.r.t. the atom position.
    pub coefficients: [T; 3],
    /// Far-field Coulomb energy of the atom at the reference position.
    pub e_far_0: T,
    pub cutoff: f64,
}

/// Splits the atom's Coulomb interactions at `cutoff` and linearizes the far
/// part around the current position.
pub fn linearize_farfield_coulomb<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    atom: usize,
    cutoff: f64,
) -> Result<FarFieldLinearization<T>, EnergyError> {
    assert!(atom < ff.n_atoms(), "atom index out of range");
    let c2 = T::c(cutoff * cutoff);
    let system_c2 = ff.cutoff.map(|c| c * c);
    let pa = atom_pos(x, atom);
    let qa = ff.coulomb_constant * ff.charge[atom];
    let special = &ff.special[atom];
    let mut sp = 0;
    let mut near_set = Vec::new();
    let mut e_far = T::zero();
    let mut coefficients = [T::zero(); 3];
    for j in 0..ff.n_atoms() {
        if j == atom {
            continue;
        }
        let is_special = sp < special.len() && special[sp].0 == j;
        if is_special {
            sp += 1;
        }
        let d = sub3(pa, atom_pos(x, j));
        let r2 = dot3(d, d);
        if is_special || r2 <= c2 {
            near_set.push(j);
            continue;
        }
        if let Some(sc2) = system_c2 {
            if r2 > sc2 {
                continue;
            }
        }
        let r = r2.sqrt();
        let e = qa * ff.charge[j] / r;
        e_far = e_far + e;
        let s = -e / r2;
        coefficients = [
            coefficients[0] + s * d[0],
            coefficients[1] + s * d[1],
            coefficients[2] + s * d[2],
        ];
    }
    Ok(FarFieldLinearization {
        atom,
        near_set,
        coefficients,
        e_far_0: e_far,
        cutoff,
    })
}

/// Approximate change of the total energy when `lin.atom` moves by `delta`:
/// exact bonded terms of the atom, exact near-field Coulomb and LJ, linear
/// far-field Coulomb. Far-field LJ is neglected.
pub fn delta_energy_atom_move<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    lin: &FarFieldLinearization<T>,
    delta: [T; 3],
) -> Result<T, EnergyError> {
    let atom = lin.atom;
    let bonded = bonded_delta(ff, x, atom, delta)?;
    let mut near = T::zero();
    for &j in &lin.near_set {
        near = near + pair_delta(ff, x, atom, j, delta)?;
    }
    let far = dot3(lin.coefficients, delta);
    Ok(bonded + near + far)
}

/// Exact change of the total energy when `atom` moves by `delta`: every
/// bonded term touching the atom and every nonbonded pair of the atom.
/// O(n), equal to a full recompute difference up to rounding.
pub fn exact_atom_move_delta<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    atom: usize,
    delta: [T; 3],
) -> Result<T, EnergyError> {
    let mut total = bonded_delta(ff, x, atom, delta)?;
    for j in 0..ff.n_atoms() {
        if j != atom {
            total = total + pair_delta(ff, x, atom, j, delta)?;
        }
    }
    Ok(total)
}

fn moved<T: Real>(x: &[T], atom: usize, moving: usize, delta: [T; 3]) -> [T; 3] {
    let p = atom_pos(x, atom);
    if atom == moving {
        [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]]
    } else {
        p
    }
}

/// Gathers the positions of `atoms` into a small local buffer, with
/// `moving` displaced by `delta`.
fn local<const N: usize, T: Real>(
    x: &[T],
    atoms: [usize; N],
    moving: usize,
    delta: [T; 3],
) -> Vec<T> {
    atoms
        .iter()
        .flat_map(|&a| moved(x, a, moving, delta))
        .collect()
}

fn bonded_delta<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    atom: usize,
    delta: [T; 3],
) -> Result<T, EnergyError> {
    let zero = [T::zero(); 3];
    let mut total = T::zero();
    for &t in &ff.bonds_of[atom] {
        let b = &ff.bonds[t];
        let local_b = Bond {
            atoms: [0, 1],
            k: b.k,
            r0: b.r0,
        };
        let new = bond_term(&local_b, &local(x, b.atoms, atom, delta)).0;
        let old = bond_term(&local_b, &local(x, b.atoms, atom, zero)).0;
        total = total + (new - old);
    }
    for &t in &ff.angles_of[atom] {
        let a = &ff.angles[t];
        let local_a = Angle {
            atoms: [0, 1, 2],
            k: a.k,
            theta0: a.theta0,
        };
        let new = angle_term(&local_a, &local(x, a.atoms, atom, delta), t)?.0;
        let old = angle_term(&local_a, &local(x, a.atoms, atom, zero), t)?.0;
        total = total + (new - old);
    }
    for &t in &ff.dihedrals_of[atom] {
        let d = &ff.dihedrals[t];
        let local_d = Dihedral {
            atoms: [0, 1, 2, 3],
            v: d.v,
        };
        let new = dihedral_term(&local_d, &local(x, d.atoms, atom, delta), t)?.0;
        let old = dihedral_term(&local_d, &local(x, d.atoms, atom, zero), t)?.0;
        total = total + (new - old);
    }
    Ok(total)
}

fn pair_energy<T: Real>(
    ff: &ForceField<T>,
    a: usize,
    j: usize,
    w: T,
    pa: [T; 3],
    pj: [T; 3],
) -> Result<T, EnergyError> {
    let d = sub3(pa, pj);
    let r2 = dot3(d, d);
    if let Some(c) = ff.cutoff {
        if r2 > c * c {
            return Ok(T::zero());
        }
    }
    if r2 == T::zero() {
        return Err(EnergyError::CoincidentPair {
            i: a.min(j),
            j: a.max(j),
        });
    }
    let (c, v, _) = pair_terms(ff, a, j, w, d, r2, false);
    Ok(c + v)
}

fn pair_delta<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    atom: usize,
    j: usize,
    delta: [T; 3],
) -> Result<T, EnergyError> {
    let w = ff.pair_weight(atom, j);
    if w == T::zero() {
        return Ok(T::zero());
    }
    let pa = atom_pos(x, atom);
    let pj = atom_pos(x, j);
    let new = pair_energy(ff, atom, j, w, moved(x, atom, atom, delta), pj)?;
    let old = pair_energy(ff, atom, j, w, pa, pj)?;
    Ok(new - old)
}
