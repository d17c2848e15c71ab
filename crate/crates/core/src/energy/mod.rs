//! OPLS energy terms, analytic gradients and the near/far incremental
//! Coulomb machinery used by the atom-wiggle method.
//!
//! All kernels take flattened coordinates `[x0, y0, z0, x1, ...]` in Å and
//! are generic over [`Real`], so the same code runs in single and double
//! precision.

mod bonded;
mod fd;
mod incremental;
mod neighbor;
mod nonbonded;

use std::fmt;

use thiserror::Error;

use crate::model::MolecularSystem;
use crate::real::Real;

pub use fd::finite_difference_gradient;
pub use incremental::{
    delta_energy_atom_move, exact_atom_move_delta, linearize_farfield_coulomb,
    FarFieldLinearization,
};
pub use neighbor::{build_neighbor_list, NeighborList};

/// `e^2 / (4 pi eps0)` in kJ·Å/(mol·e²).
pub const COULOMB_CONSTANT: f64 = 1389.38757;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("angle term #{term}: zero-length arm")]
    DegenerateAngle { term: usize },
    #[error("dihedral term #{term}: collinear atoms, dihedral undefined")]
    DegenerateDihedral { term: usize },
    #[error("atoms {i} and {j} coincide")]
    CoincidentPair { i: usize, j: usize },
}

/// How the O(n²) nonbonded loops are executed.
///
/// Both paths produce bit-identical results: each outer index is reduced
/// independently and the per-row partials are combined in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon over the outer index; same as `Sequential` without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Per-term energies, kJ/mol.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown<T = f64> {
    pub stretch: T,
    pub bend: T,
    pub torsion: T,
    pub coulomb: T,
    pub vdw: T,
}

impl<T: Real> EnergyBreakdown<T> {
    /// Sum of the five terms, always in the same order.
    pub fn total(&self) -> T {
        self.stretch + self.bend + self.torsion + self.coulomb + self.vdw
    }

    pub fn to_f64(&self) -> EnergyBreakdown<f64> {
        EnergyBreakdown {
            stretch: self.stretch.to_f64_lossy(),
            bend: self.bend.to_f64_lossy(),
            torsion: self.torsion.to_f64_lossy(),
            coulomb: self.coulomb.to_f64_lossy(),
            vdw: self.vdw.to_f64_lossy(),
        }
    }
}

impl<T: Real> fmt::Display for EnergyBreakdown<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stretch  {:>20.8}", self.stretch)?;
        writeln!(f, "bend     {:>20.8}", self.bend)?;
        writeln!(f, "torsion  {:>20.8}", self.torsion)?;
        writeln!(f, "coulomb  {:>20.8}", self.coulomb)?;
        writeln!(f, "vdw      {:>20.8}", self.vdw)?;
        write!(f, "total    {:>20.8}", self.total())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Bond<T> {
    pub atoms: [usize; 2],
    pub k: T,
    pub r0: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Angle<T> {
    pub atoms: [usize; 3],
    pub k: T,
    pub theta0: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Dihedral<T> {
    pub atoms: [usize; 4],
    pub v: [T; 4],
}

/// Evaluation-ready force field: parameter tables converted to `T`, the
/// exclusion policy as sorted per-atom partner lists, and per-atom term
/// adjacency for local (single-atom) recomputation.
#[derive(Debug, Clone)]
pub struct ForceField<T: Real> {
    n_atoms: usize,
    pub(crate) bonds: Vec<Bond<T>>,
    pub(crate) angles: Vec<Angle<T>>,
    pub(crate) dihedrals: Vec<Dihedral<T>>,
    pub(crate) charge: Vec<T>,
    pub(crate) sqrt_sigma: Vec<T>,
    pub(crate) sqrt_epsilon: Vec<T>,
    /// Sorted `(partner, weight)` with weight 0 (excluded) or s14.
    pub(crate) special: Vec<Vec<(usize, T)>>,
    pub(crate) cutoff: Option<T>,
    pub(crate) coulomb_constant: T,
    pub(crate) bonds_of: Vec<Vec<usize>>,
    pub(crate) angles_of: Vec<Vec<usize>>,
    pub(crate) dihedrals_of: Vec<Vec<usize>>,
    execution: Execution,
}

impl<T: Real> ForceField<T> {
    /// Builds the tables from a validated system.
    pub fn new(system: &MolecularSystem) -> Self {
        let n = system.n_atoms();
        let mut special = vec![Vec::new(); n];
        let policy = &system.nonbonded;
        for &(i, j) in &policy.excluded_pairs {
            special[i].push((j, T::zero()));
            special[j].push((i, T::zero()));
        }
        let s14 = T::c(policy.s14);
        for &(i, j) in &policy.scaled14_pairs {
            special[i].push((j, s14));
            special[j].push((i, s14));
        }
        for list in &mut special {
            list.sort_by_key(|&(j, _)| j);
        }

        let mut bonds_of = vec![Vec::new(); n];
        let mut angles_of = vec![Vec::new(); n];
        let mut dihedrals_of = vec![Vec::new(); n];
        for (t, b) in system.bonds.iter().enumerate() {
            b.atoms.iter().for_each(|&a| bonds_of[a].push(t));
        }
        for (t, a) in system.angles.iter().enumerate() {
            a.atoms.iter().for_each(|&x| angles_of[x].push(t));
        }
        for (t, d) in system.dihedrals.iter().enumerate() {
            d.atoms.iter().for_each(|&x| dihedrals_of[x].push(t));
        }

        ForceField {
            n_atoms: n,
            bonds: system
                .bonds
                .iter()
                .map(|b| Bond {
                    atoms: b.atoms,
                    k: T::c(b.k),
                    r0: T::c(b.r0),
                })
                .collect(),
            angles: system
                .angles
                .iter()
                .map(|a| Angle {
                    atoms: a.atoms,
                    k: T::c(a.k_theta),
                    theta0: T::c(a.theta0),
                })
                .collect(),
            dihedrals: system
                .dihedrals
                .iter()
                .map(|d| Dihedral {
                    atoms: d.atoms,
                    v: d.v.map(T::c),
                })
                .collect(),
            charge: system.atoms.iter().map(|a| T::c(a.charge)).collect(),
            sqrt_sigma: system.atoms.iter().map(|a| T::c(a.sigma.sqrt())).collect(),
            sqrt_epsilon: system
                .atoms
                .iter()
                .map(|a| T::c(a.epsilon.sqrt()))
                .collect(),
            special,
            cutoff: policy.cutoff.map(T::c),
            coulomb_constant: T::c(COULOMB_CONSTANT),
            bonds_of,
            angles_of,
            dihedrals_of,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Length of the flattened coordinate vector.
    pub fn dimension(&self) -> usize {
        3 * self.n_atoms
    }

    /// Weight of pair `(i, j)` in the nonbonded sums.
    pub(crate) fn pair_weight(&self, i: usize, j: usize) -> T {
        match self.special[i].binary_search_by_key(&j, |&(p, _)| p) {
            Ok(pos) => self.special[i][pos].1,
            Err(_) => T::one(),
        }
    }

    pub fn stretch(&self, x: &[T]) -> T {
        self.check_len(x);
        bonded::stretch(&self.bonds, x, None)
    }

    pub fn bend(&self, x: &[T]) -> Result<T, EnergyError> {
        self.check_len(x);
        bonded::bend(&self.angles, x, None)
    }

    pub fn torsion(&self, x: &[T]) -> Result<T, EnergyError> {
        self.check_len(x);
        bonded::torsion(&self.dihedrals, x, None)
    }

    pub fn coulomb(&self, x: &[T]) -> Result<T, EnergyError> {
        Ok(self.nonbonded(x)?.0)
    }

    pub fn vdw(&self, x: &[T]) -> Result<T, EnergyError> {
        Ok(self.nonbonded(x)?.1)
    }

    fn nonbonded(&self, x: &[T]) -> Result<(T, T), EnergyError> {
        self.check_len(x);
        let (coulomb, vdw, _) = nonbonded::evaluate(self, x, false)?;
        Ok((coulomb, vdw))
    }

    /// All five terms.
    pub fn energy(&self, x: &[T]) -> Result<EnergyBreakdown<T>, EnergyError> {
        self.check_len(x);
        let (coulomb, vdw) = self.nonbonded(x)?;
        Ok(EnergyBreakdown {
            stretch: bonded::stretch(&self.bonds, x, None),
            bend: bonded::bend(&self.angles, x, None)?,
            torsion: bonded::torsion(&self.dihedrals, x, None)?,
            coulomb,
            vdw,
        })
    }

    pub fn total(&self, x: &[T]) -> Result<T, EnergyError> {
        Ok(self.energy(x)?.total())
    }

    /// Analytic gradient, kJ/(mol·Å), flattened like `x`.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>, EnergyError> {
        Ok(self.energy_and_gradient(x)?.1)
    }

    pub fn energy_and_gradient(
        &self,
        x: &[T],
    ) -> Result<(EnergyBreakdown<T>, Vec<T>), EnergyError> {
        self.check_len(x);
        let (coulomb, vdw, grad) = nonbonded::evaluate(self, x, true)?;
        let mut grad = grad.expect("gradient requested");
        let breakdown = EnergyBreakdown {
            stretch: bonded::stretch(&self.bonds, x, Some(&mut grad)),
            bend: bonded::bend(&self.angles, x, Some(&mut grad))?,
            torsion: bonded::torsion(&self.dihedrals, x, Some(&mut grad))?,
            coulomb,
            vdw,
        };
        Ok((breakdown, grad))
    }

    fn check_len(&self, x: &[T]) {
        assert_eq!(x.len(), self.dimension(), "coordinate vector length");
    }
}

#[inline]
pub(crate) fn atom_pos<T: Real>(x: &[T], i: usize) -> [T; 3] {
    [x[3 * i], x[3 * i + 1], x[3 * i + 2]]
}

#[inline]
pub(crate) fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn scale3<T: Real>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn add_to<T: Real>(grad: &mut [T], atom: usize, v: [T; 3]) {
    grad[3 * atom] = grad[3 * atom] + v[0];
    grad[3 * atom + 1] = grad[3 * atom + 1] + v[1];
    grad[3 * atom + 2] = grad[3 * atom + 2] + v[2];
}

#[cfg(test)]
pub(crate) mod test_systems {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::model::{
        build_default_exclusions, AngleTerm, AtomSpec, BondTerm, DihedralTerm, MolecularSystem,
        NonbondedPolicy, Vec3,
    };

    /// Random chain molecule with every term type, coordinates from a
    /// self-avoiding walk with bond length ~1.5 Å.
    pub fn random_chain(n: usize, seed: u64, exclusions: bool) -> MolecularSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords: Vec<Vec3> = Vec::with_capacity(n);
        while coords.len() < n {
            let candidate = match coords.last() {
                None => Vec3::ZERO,
                Some(&last) => {
                    let dir = loop {
                        let v = Vec3::new(
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        );
                        let r = v.norm();
                        if r > 0.2 && r <= 1.0 {
                            break v * (1.0 / r);
                        }
                    };
                    last + dir * rng.gen_range(1.3..1.7)
                }
            };
            if coords.iter().all(|c| (*c - candidate).norm() > 1.2) {
                coords.push(candidate);
            }
        }
        let atoms = (0..n)
            .map(|i| AtomSpec {
                id: i as i64,
                label: format!("X{i}"),
                charge: rng.gen_range(-0.6..0.6),
                sigma: rng.gen_range(1.0..1.6),
                epsilon: rng.gen_range(0.05..0.5),
            })
            .collect();
        let bonds = (0..n.saturating_sub(1))
            .map(|i| BondTerm {
                atoms: [i, i + 1],
                k: rng.gen_range(200.0..400.0),
                r0: 1.5,
            })
            .collect();
        let angles = (0..n.saturating_sub(2))
            .map(|i| AngleTerm {
                atoms: [i, i + 1, i + 2],
                k_theta: rng.gen_range(30.0..80.0),
                theta0: rng.gen_range(1.8..2.0),
            })
            .collect();
        let dihedrals = (0..n.saturating_sub(3))
            .map(|i| DihedralTerm {
                atoms: [i, i + 1, i + 2, i + 3],
                v: [
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-1.0..1.0),
                ],
            })
            .collect();
        let mut system = MolecularSystem {
            atoms,
            coords,
            bonds,
            angles,
            dihedrals,
            nonbonded: NonbondedPolicy::no_exclusions(),
        };
        if exclusions {
            system.nonbonded = build_default_exclusions(&system, 0.5);
        }
        system.validate().unwrap();
        system
    }
}
