use std::collections::{BTreeSet, VecDeque};

use super::{ExclusionMode, MolecularSystem, NonbondedPolicy};

/// Derives the standard 1-2/1-3 exclusions and 1-4 scaling from the bond
/// graph. Graph distance is the shortest path in bonds, so a pair closed by a
/// small ring is excluded rather than scaled.
///
/// The cutoff of the current policy is kept.
pub fn build_default_exclusions(system: &MolecularSystem, s14: f64) -> NonbondedPolicy {
    let n = system.n_atoms();
    let mut adjacency = vec![Vec::new(); n];
    for b in &system.bonds {
        let [i, j] = b.atoms;
        adjacency[i].push(j);
        adjacency[j].push(i);
    }

    let mut excluded_pairs = BTreeSet::new();
    let mut scaled14_pairs = BTreeSet::new();
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut touched = Vec::new();
    for start in 0..n {
        depth[start] = 0;
        touched.push(start);
        queue.push_back(start);
        while let Some(a) = queue.pop_front() {
            if depth[a] == 3 {
                continue;
            }
            for &b in &adjacency[a] {
                if depth[b] == usize::MAX {
                    depth[b] = depth[a] + 1;
                    touched.push(b);
                    queue.push_back(b);
                }
            }
        }
        for &t in &touched {
            if t > start {
                match depth[t] {
                    1 | 2 => {
                        excluded_pairs.insert((start, t));
                    }
                    3 => {
                        scaled14_pairs.insert((start, t));
                    }
                    _ => {}
                }
            }
            depth[t] = usize::MAX;
        }
        touched.clear();
    }

    NonbondedPolicy {
        mode: ExclusionMode::Auto,
        excluded_pairs,
        scaled14_pairs,
        s14,
        cutoff: system.nonbonded.cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AtomSpec, BondTerm, Vec3};

    fn system(n: usize, bonds: &[(usize, usize)]) -> MolecularSystem {
        MolecularSystem {
            atoms: (0..n)
                .map(|i| AtomSpec {
                    id: i as i64,
                    label: String::new(),
                    charge: 0.0,
                    sigma: 1.0,
                    epsilon: 0.0,
                })
                .collect(),
            coords: vec![Vec3::ZERO; n],
            bonds: bonds
                .iter()
                .map(|&(i, j)| BondTerm {
                    atoms: [i, j],
                    k: 1.0,
                    r0: 1.0,
                })
                .collect(),
            ..Default::default()
        }
    }

    /// Floyd-Warshall distances, independent of the BFS above.
    fn graph_distances(n: usize, bonds: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(i, j) in bonds {
            d[i][j] = 1;
            d[j][i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn check_against_oracle(n: usize, bonds: &[(usize, usize)]) {
        let policy = build_default_exclusions(&system(n, bonds), 0.5);
        let d = graph_distances(n, bonds);
        for i in 0..n {
            for j in i + 1..n {
                let excluded = policy.excluded_pairs.contains(&(i, j));
                let scaled = policy.scaled14_pairs.contains(&(i, j));
                assert_eq!(excluded, d[i][j] == 1 || d[i][j] == 2, "pair {i},{j}");
                assert_eq!(scaled, d[i][j] == 3, "pair {i},{j}");
            }
        }
    }

    #[test]
    fn linear_chain() {
        let policy = build_default_exclusions(&system(4, &[(0, 1), (1, 2), (2, 3)]), 0.5);
        let excluded: Vec<_> = policy.excluded_pairs.iter().copied().collect();
        assert_eq!(excluded, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let scaled: Vec<_> = policy.scaled14_pairs.iter().copied().collect();
        assert_eq!(scaled, vec![(0, 3)]);
        assert_eq!(policy.s14, 0.5);
        assert_eq!(policy.mode, ExclusionMode::Auto);
    }

    #[test]
    fn disconnected_atoms() {
        let policy = build_default_exclusions(&system(2, &[]), 0.5);
        assert!(policy.excluded_pairs.is_empty());
        assert!(policy.scaled14_pairs.is_empty());
    }

    #[test]
    fn four_ring_has_no_scaled_pairs() {
        let bonds = [(0, 1), (1, 2), (2, 3), (3, 0)];
        let policy = build_default_exclusions(&system(4, &bonds), 0.5);
        assert_eq!(policy.excluded_pairs.len(), 6);
        assert!(policy.scaled14_pairs.is_empty());
        check_against_oracle(4, &bonds);
    }

    #[test]
    fn branched_and_ring_graphs_match_oracle() {
        check_against_oracle(
            9,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 0),
                (2, 6),
                (6, 7),
                (7, 8),
            ],
        );
        check_against_oracle(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]);
    }
}
