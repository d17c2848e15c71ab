//! Molecular data model: atoms, coordinates, bonded topology and the
//! nonbonded exclusion policy.
//!
//! Units: lengths in Å, energies in kJ/mol, charges in elementary charges,
//! angles in radians (files carry degrees).

mod exclusions;
mod io;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

pub use exclusions::build_default_exclusions;
pub use io::{load_system, parse_system, save_system, write_system, LoadError, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Per-atom nonbonded parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpec {
    pub id: i64,
    pub label: String,
    /// Partial charge, e.
    pub charge: f64,
    /// Lennard-Jones radius, Å.
    pub sigma: f64,
    /// Lennard-Jones well depth, kJ/mol.
    pub epsilon: f64,
}

/// Harmonic bond `K (r - r0)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondTerm {
    pub atoms: [usize; 2],
    pub k: f64,
    pub r0: f64,
}

/// Harmonic angle `Ktheta (theta - theta0)^2`; `atoms[1]` is the apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTerm {
    pub atoms: [usize; 3],
    pub k_theta: f64,
    /// Radians.
    pub theta0: f64,
}

/// OPLS Fourier torsion over the chain `i-j-k-l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralTerm {
    pub atoms: [usize; 4],
    pub v: [f64; 4],
}

/// How the exclusion sets of a [`NonbondedPolicy`] were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExclusionMode {
    /// Derived from the bond graph (1-2/1-3 excluded, 1-4 scaled).
    #[default]
    Auto,
    /// Listed in the input file.
    Explicit,
    /// Every pair interacts with weight 1.
    None,
}

impl ExclusionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionMode::Auto => "auto",
            ExclusionMode::Explicit => "explicit",
            ExclusionMode::None => "none",
        }
    }
}

impl fmt::Display for ExclusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which atom pairs enter the Coulomb and Lennard-Jones sums, and how.
///
/// Pairs are stored canonically with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonbondedPolicy {
    pub mode: ExclusionMode,
    pub excluded_pairs: BTreeSet<(usize, usize)>,
    pub scaled14_pairs: BTreeSet<(usize, usize)>,
    pub s14: f64,
    /// Hard truncation radius, Å. `None` means all pairs.
    pub cutoff: Option<f64>,
}

impl Default for NonbondedPolicy {
    fn default() -> Self {
        NonbondedPolicy::no_exclusions()
    }
}

impl NonbondedPolicy {
    pub const DEFAULT_S14: f64 = 0.5;

    /// Literal all-pairs sums, no cutoff.
    pub fn no_exclusions() -> Self {
        NonbondedPolicy {
            mode: ExclusionMode::None,
            excluded_pairs: BTreeSet::new(),
            scaled14_pairs: BTreeSet::new(),
            s14: Self::DEFAULT_S14,
            cutoff: None,
        }
    }

    pub fn with_cutoff(mut self, cutoff: Option<f64>) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Weight of the pair in the nonbonded sums: 0, `s14` or 1.
    pub fn pair_scale(&self, i: usize, j: usize) -> f64 {
        let key = canonical(i, j);
        if self.excluded_pairs.contains(&key) {
            0.0
        } else if self.scaled14_pairs.contains(&key) {
            self.s14
        } else {
            1.0
        }
    }
}

pub(crate) fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MolecularSystem {
    pub atoms: Vec<AtomSpec>,
    pub coords: Vec<Vec3>,
    pub bonds: Vec<BondTerm>,
    pub angles: Vec<AngleTerm>,
    pub dihedrals: Vec<DihedralTerm>,
    pub nonbonded: NonbondedPolicy,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("coords has {coords} entries but there are {atoms} atoms")]
    CoordCount { atoms: usize, coords: usize },
    #[error("{term} #{index}: index out of range ({atom} >= {n_atoms})")]
    IndexOutOfRange {
        term: &'static str,
        index: usize,
        atom: usize,
        n_atoms: usize,
    },
    #[error("{term} #{index}: repeated atom index")]
    RepeatedIndex { term: &'static str, index: usize },
    #[error("{term} #{index}: duplicate term over the same atoms")]
    DuplicateTerm { term: &'static str, index: usize },
    #[error("{term} #{index}: {what}")]
    BadParameter {
        term: &'static str,
        index: usize,
        what: String,
    },
    #[error("duplicate atom id {0}")]
    DuplicateAtomId(i64),
    #[error("nonbonded policy: {0}")]
    Policy(String),
}

impl MolecularSystem {
    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Flattened `[x0, y0, z0, x1, ...]` coordinates.
    pub fn flat_coords(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| c.to_array()).collect()
    }

    /// Replaces the coordinates from a flattened array of length `3 n`.
    pub fn set_flat_coords(&mut self, x: &[f64]) {
        assert_eq!(x.len(), 3 * self.n_atoms(), "flat coordinate length");
        self.coords = x
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect();
    }

    /// Checks every structural invariant of the system.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.n_atoms();
        if self.coords.len() != n {
            return Err(ValidationError::CoordCount {
                atoms: n,
                coords: self.coords.len(),
            });
        }
        let mut ids = HashSet::new();
        for (index, atom) in self.atoms.iter().enumerate() {
            if !ids.insert(atom.id) {
                return Err(ValidationError::DuplicateAtomId(atom.id));
            }
            if !(atom.sigma > 0.0) || !atom.sigma.is_finite() {
                return Err(bad(
                    "atom",
                    index,
                    format!("sigma must be > 0, got {}", atom.sigma),
                ));
            }
            if !(atom.epsilon >= 0.0) || !atom.epsilon.is_finite() {
                return Err(bad(
                    "atom",
                    index,
                    format!("epsilon must be >= 0, got {}", atom.epsilon),
                ));
            }
            if !atom.charge.is_finite() {
                return Err(bad("atom", index, "charge must be finite".into()));
            }
        }
        for (index, c) in self.coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(bad("coord", index, "coordinates must be finite".into()));
            }
        }

        let mut seen = HashSet::new();
        for (index, b) in self.bonds.iter().enumerate() {
            check_indices("bond", index, &b.atoms, n)?;
            if !(b.k >= 0.0) || !b.k.is_finite() {
                return Err(bad("bond", index, format!("K must be >= 0, got {}", b.k)));
            }
            if !(b.r0 > 0.0) || !b.r0.is_finite() {
                return Err(bad("bond", index, format!("r0 must be > 0, got {}", b.r0)));
            }
            if !seen.insert(b.atoms.to_vec()) {
                return Err(ValidationError::DuplicateTerm {
                    term: "bond",
                    index,
                });
            }
        }
        seen.clear();
        for (index, a) in self.angles.iter().enumerate() {
            check_indices("angle", index, &a.atoms, n)?;
            if !(a.k_theta >= 0.0) || !a.k_theta.is_finite() {
                return Err(bad(
                    "angle",
                    index,
                    format!("Ktheta must be >= 0, got {}", a.k_theta),
                ));
            }
            if !(a.theta0 > 0.0 && a.theta0 < std::f64::consts::PI) {
                return Err(bad(
                    "angle",
                    index,
                    format!("theta0 must lie in (0, pi), got {}", a.theta0),
                ));
            }
            if !seen.insert(a.atoms.to_vec()) {
                return Err(ValidationError::DuplicateTerm {
                    term: "angle",
                    index,
                });
            }
        }
        seen.clear();
        for (index, d) in self.dihedrals.iter().enumerate() {
            check_indices("dihedral", index, &d.atoms, n)?;
            if d.v.iter().any(|v| !v.is_finite()) {
                return Err(bad("dihedral", index, "V1..V4 must be finite".into()));
            }
            if !seen.insert(d.atoms.to_vec()) {
                return Err(ValidationError::DuplicateTerm {
                    term: "dihedral",
                    index,
                });
            }
        }

        let policy = &self.nonbonded;
        if !(0.0..=1.0).contains(&policy.s14) {
            return Err(ValidationError::Policy(format!(
                "s14 must lie in [0, 1], got {}",
                policy.s14
            )));
        }
        if let Some(c) = policy.cutoff {
            if !(c > 0.0) || !c.is_finite() {
                return Err(ValidationError::Policy(format!(
                    "cutoff must be > 0, got {c}"
                )));
            }
        }
        for &(i, j) in policy.excluded_pairs.iter().chain(&policy.scaled14_pairs) {
            if i >= j || j >= n {
                return Err(ValidationError::Policy(format!(
                    "pair ({i}, {j}) is not canonical (i < j < {n}); index out of range"
                )));
            }
        }
        if let Some(p) = policy
            .excluded_pairs
            .intersection(&policy.scaled14_pairs)
            .next()
        {
            return Err(ValidationError::Policy(format!(
                "pair {p:?} is both excluded and scaled"
            )));
        }
        Ok(())
    }
}

fn bad(term: &'static str, index: usize, what: String) -> ValidationError {
    ValidationError::BadParameter { term, index, what }
}

fn check_indices(
    term: &'static str,
    index: usize,
    atoms: &[usize],
    n_atoms: usize,
) -> Result<(), ValidationError> {
    for &atom in atoms {
        if atom >= n_atoms {
            return Err(ValidationError::IndexOutOfRange {
                term,
                index,
                atom,
                n_atoms,
            });
        }
    }
    for (a, &x) in atoms.iter().enumerate() {
        if atoms[a + 1..].contains(&x) {
            return Err(ValidationError::RepeatedIndex { term, index });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn atom(id: i64) -> AtomSpec {
        AtomSpec {
            id,
            label: format!("A{id}"),
            charge: 0.0,
            sigma: 3.0,
            epsilon: 0.2,
        }
    }

    fn diatomic() -> MolecularSystem {
        MolecularSystem {
            atoms: vec![atom(0), atom(1)],
            coords: vec![Vec3::ZERO, Vec3::new(1.5, 0.0, 0.0)],
            bonds: vec![BondTerm {
                atoms: [0, 1],
                k: 100.0,
                r0: 1.5,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn valid_diatomic() {
        diatomic().validate().unwrap();
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut s = diatomic();
        s.bonds[0].atoms = [0, 2];
        let err = s.validate().unwrap_err();
        assert!(err.to_string().contains("index out of range"), "{err}");
    }

    #[test]
    fn coord_count_mismatch() {
        let mut s = diatomic();
        s.coords.pop();
        assert!(matches!(
            s.validate(),
            Err(ValidationError::CoordCount { .. })
        ));
    }

    #[test]
    fn duplicate_terms_and_ids() {
        let mut s = diatomic();
        s.bonds.push(s.bonds[0]);
        assert!(matches!(
            s.validate(),
            Err(ValidationError::DuplicateTerm { .. })
        ));

        let mut s = diatomic();
        s.atoms[1].id = 0;
        assert!(matches!(
            s.validate(),
            Err(ValidationError::DuplicateAtomId(0))
        ));
    }

    #[test]
    fn parameter_ranges() {
        let mut s = diatomic();
        s.atoms[0].sigma = 0.0;
        assert!(s.validate().is_err());

        let mut s = diatomic();
        s.bonds[0].atoms = [1, 1];
        assert!(matches!(
            s.validate(),
            Err(ValidationError::RepeatedIndex { .. })
        ));

        let mut s = diatomic();
        s.nonbonded.excluded_pairs.insert((0, 1));
        s.nonbonded.scaled14_pairs.insert((0, 1));
        assert!(matches!(s.validate(), Err(ValidationError::Policy(_))));
    }

    #[test]
    fn flat_coords_roundtrip() {
        let mut s = diatomic();
        let x = s.flat_coords();
        assert_eq!(x, vec![0.0, 0.0, 0.0, 1.5, 0.0, 0.0]);
        s.set_flat_coords(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(s.coords[1], Vec3::new(4.0, 5.0, 6.0));
    }
}
