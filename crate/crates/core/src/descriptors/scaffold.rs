//! Bemis–Murcko scaffolds and the simplified fragment decomposition used by
//! the Frag distribution metric.

use crate::graph::{atom_ring_flags, canonical_key, MolecularGraph};
use std::collections::HashMap;

/// Bemis–Murcko scaffold: iteratively prune heavy atoms of degree at most one
/// that are not on a ring, leaving ring systems and the linkers between them.
/// Acyclic molecules give an empty scaffold.
pub fn scaffold(g: &MolecularGraph) -> MolecularGraph {
    let ring = atom_ring_flags(g);
    let mut alive: Vec<bool> = (0..g.atom_count()).map(|_| true).collect();
    loop {
        let mut degree = vec![0usize; g.atom_count()];
        for b in g.bonds() {
            if alive[b.a] && alive[b.b] {
                degree[b.a] += 1;
                degree[b.b] += 1;
            }
        }
        let mut pruned = false;
        for i in 0..g.atom_count() {
            if alive[i] && !ring[i] && degree[i] <= 1 {
                alive[i] = false;
                pruned = true;
            }
        }
        if !pruned {
            break;
        }
    }
    let keep: Vec<usize> = (0..g.atom_count()).filter(|&i| alive[i]).collect();
    g.induced_subgraph(&keep)
}

/// Canonical key of the scaffold; empty scaffolds share the key `"empty"`.
pub fn scaffold_key(g: &MolecularGraph) -> String {
    canonical_key(&scaffold(g))
}

/// A multiset of canonical fragment keys with counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FragmentMultiset {
    pub counts: HashMap<String, usize>,
}

impl FragmentMultiset {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Fragment a molecule with the simplified two-rule scheme: cut every acyclic
/// single bond (a) between a ring atom and a non-ring heavy atom and (b)
/// between a heteroatom and a carbon. Each resulting component is
/// canonicalized (hydrogens re-saturated) and counted.
///
/// This deliberately replaces the full 16-rule BRICS system; the Frag metric
/// only compares fragment distributions between two sets, so any fixed,
/// chemistry-plausible rule set yields a valid comparison.
pub fn fragments(g: &MolecularGraph) -> FragmentMultiset {
    let ring_atom = atom_ring_flags(g);
    let ring_bond = crate::graph::bond_ring_flags(g);
    let n = g.atom_count();
    let mut cut = vec![false; g.bond_count()];
    for (i, b) in g.bonds().iter().enumerate() {
        if ring_bond[i] || b.order != 1 {
            continue;
        }
        let ring_to_chain = ring_atom[b.a] != ring_atom[b.b];
        let hetero_to_carbon = g.atoms()[b.a].element.is_hetero()
            != g.atoms()[b.b].element.is_hetero();
        if ring_to_chain || hetero_to_carbon {
            cut[i] = true;
        }
    }

    // connected components of the graph minus cut bonds
    let mut comp = vec![usize::MAX; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in g.bonds().iter().enumerate() {
        if !cut[i] {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
    }
    let mut n_comp = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comp;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = n_comp;
                    queue.push_back(w);
                }
            }
        }
        n_comp += 1;
    }

    let mut out = FragmentMultiset::default();
    for c in 0..n_comp {
        let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        let frag = g.induced_subgraph(&members);
        *out.counts.entry(canonical_key(&frag)).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::isomorphic;
    use crate::lang::parse_smiles;

    #[test]
    fn hexane_scaffold_is_empty() {
        let g = parse_smiles("CCCCCC").unwrap();
        assert_eq!(scaffold(&g).atom_count(), 0);
    }

    #[test]
    fn toluene_scaffold_is_benzene() {
        let toluene = parse_smiles("Cc1ccccc1").unwrap();
        let benzene = parse_smiles("c1ccccc1").unwrap();
        assert!(isomorphic(&scaffold(&toluene), &benzene));
    }

    #[test]
    fn biphenyl_tail_keeps_biphenyl() {
        let tailed = parse_smiles("CCc1ccc(-c2ccccc2)cc1").unwrap();
        let biphenyl = parse_smiles("c1ccc(-c2ccccc2)cc1").unwrap();
        assert!(isomorphic(&scaffold(&tailed), &scaffold(&biphenyl)));
        assert!(isomorphic(&scaffold(&tailed), &biphenyl));
    }

    #[test]
    fn benzene_fragments_to_itself() {
        let g = parse_smiles("c1ccccc1").unwrap();
        let f = fragments(&g);
        assert_eq!(f.total(), 1);
        assert_eq!(f.counts[&canonical_key(&g)], 1);
    }

    #[test]
    fn toluene_splits_ring_and_methyl() {
        let g = parse_smiles("Cc1ccccc1").unwrap();
        let f = fragments(&g);
        assert_eq!(f.total(), 2);
        let benzene_key = canonical_key(&parse_smiles("c1ccccc1").unwrap());
        let methane_key = canonical_key(&parse_smiles("C").unwrap());
        assert_eq!(f.counts[&benzene_key], 1);
        assert_eq!(f.counts[&methane_key], 1);
    }

    #[test]
    fn ethane_does_not_split() {
        let g = parse_smiles("CC").unwrap();
        let f = fragments(&g);
        assert_eq!(f.total(), 1);
    }

    #[test]
    fn fragment_atoms_conserved() {
        for smi in ["CCO", "Cc1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "CNC(C)=O"] {
            let g = parse_smiles(smi).unwrap();
            let f = fragments(&g);
            // recover heavy-atom counts from fragment keys is indirect; use
            // component math instead: cuts preserve atoms
            let total_heavy: usize = f
                .counts
                .iter()
                .map(|(key, count)| {
                    let atoms = key.split('|').next().unwrap().split(',').count() - 1;
                    atoms * count
                })
                .sum();
            assert_eq!(total_heavy, g.atom_count(), "{smi}");
        }
    }
}
