use super::{atom_pos, dot3, sub3};
use crate::real::Real;

/// Atoms within `cutoff` of each atom (inclusive), excluding itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub cutoff: f64,
    pub neighbors: Vec<Vec<usize>>,
}

impl NeighborList {
    pub fn of(&self, atom: usize) -> &[usize] {
        &self.neighbors[atom]
    }
}

/// Brute-force O(n²) pair scan.
pub fn build_neighbor_list<T: Real>(x: &[T], cutoff: f64) -> NeighborList {
    assert!(cutoff > 0.0, "cutoff must be positive");
    assert_eq!(x.len() % 3, 0);
    let n = x.len() / 3;
    let c2 = T::c(cutoff * cutoff);
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        let pi = atom_pos(x, i);
        for j in i + 1..n {
            let d = sub3(pi, atom_pos(x, j));
            if dot3(d, d) <= c2 {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    NeighborList { cutoff, neighbors }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn two_atoms() {
        let x = [0.0, 0.0, 0.0, 5.0, 0.0, 0.0];
        let nl = build_neighbor_list(&x, 7.0);
        assert_eq!(nl.of(0), &[1]);
        assert_eq!(nl.of(1), &[0]);
        let x = [0.0, 0.0, 0.0, 8.0, 0.0, 0.0];
        let nl = build_neighbor_list(&x, 7.0);
        assert!(nl.of(0).is_empty() && nl.of(1).is_empty());
    }

    #[test]
    fn thirty_random_atoms_match_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let x: Vec<f64> = (0..90).map(|_| rng.gen_range(0.0..15.0)).collect();
        let nl = build_neighbor_list(&x, 7.0);
        for i in 0..30 {
            // independent route: filter every j by explicit distance
            let expected: Vec<usize> = (0..30)
                .filter(|&j| {
                    j != i && {
                        let d: f64 = (0..3).map(|a| (x[3 * i + a] - x[3 * j + a]).powi(2)).sum();
                        d.sqrt() <= 7.0
                    }
                })
                .collect();
            assert_eq!(nl.of(i), expected.as_slice());
            for &j in nl.of(i) {
                assert!(nl.of(j).contains(&i));
            }
        }
    }
}
