//! Canonical graph keys via iterative neighborhood refinement with
//! individualization on ties.
//!
//! Equal keys hold exactly for isomorphic graphs over the supported feature
//! set (element, bond orders, hydrogen counts). The lex-min serialization over
//! all individualization choices makes the key independent of input atom
//! order.

use super::MolecularGraph;

/// A canonical atom ordering: `order[position] = original atom index`.
pub fn canonical_order(g: &MolecularGraph) -> Vec<usize> {
    let n = g.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let colors = initial_colors(g);
    let colors = refine(g, colors);
    let (_, order) = best_labeling(g, &colors);
    order
}

/// A text key equal for isomorphic graphs and stable across runs.
pub fn canonical_key(g: &MolecularGraph) -> String {
    if g.atom_count() == 0 {
        return String::from("empty");
    }
    let colors = initial_colors(g);
    let colors = refine(g, colors);
    let (key, _) = best_labeling(g, &colors);
    key
}

pub fn isomorphic(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    if a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    canonical_key(a) == canonical_key(b)
}

fn initial_colors(g: &MolecularGraph) -> Vec<u32> {
    let sigs: Vec<(u8, usize, u8)> = (0..g.atom_count())
        .map(|i| {
            let a = g.atoms()[i];
            (a.element as u8, g.degree(i), a.explicit_h)
        })
        .collect();
    let mut distinct = sigs.clone();
    distinct.sort_unstable();
    distinct.dedup();
    sigs.iter()
        .map(|s| distinct.binary_search(s).unwrap() as u32)
        .collect()
}

/// Stable neighborhood refinement: recolor by (color, sorted multiset of
/// (bond order, neighbor color)) until the partition stops splitting.
fn refine(g: &MolecularGraph, mut colors: Vec<u32>) -> Vec<u32> {
    let n = g.atom_count();
    loop {
        let mut sigs: Vec<(u32, Vec<(u8, u32)>)> = Vec::with_capacity(n);
        for i in 0..n {
            let mut nb: Vec<(u8, u32)> = g
                .neighbors(i)
                .iter()
                .map(|&(j, order)| (order, colors[j]))
                .collect();
            nb.sort_unstable();
            sigs.push((colors[i], nb));
        }
        let mut distinct = sigs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let next: Vec<u32> = (0..n)
            .map(|i| distinct.binary_search(&sigs[i]).unwrap() as u32)
            .collect();
        let classes = |c: &Vec<u32>| {
            let mut s: Vec<u32> = c.clone();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

/// Recursively individualize the first non-singleton color class and keep the
/// lexicographically smallest serialization.
fn best_labeling(g: &MolecularGraph, colors: &[u32]) -> (String, Vec<usize>) {
    // find the smallest color value held by more than one atom
    let n = g.atom_count();
    let mut count = std::collections::HashMap::new();
    for &c in colors {
        *count.entry(c).or_insert(0usize) += 1;
    }
    let tie = count
        .iter()
        .filter(|&(_, &cnt)| cnt > 1)
        .map(|(&c, _)| c)
        .min();

    match tie {
        None => {
            let order = discrete_order(colors);
            (serialize(g, &order), order)
        }
        Some(class) => {
            let mut best: Option<(String, Vec<usize>)> = None;
            for atom in 0..n {
                if colors[atom] != class {
                    continue;
                }
                // give `atom` a fresh color below its class, then re-refine
                let mut next: Vec<u32> = colors.iter().map(|&c| c * 2 + 1).collect();
                next[atom] = class * 2;
                let refined = refine(g, next);
                let cand = best_labeling(g, &refined);
                if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                    best = Some(cand);
                }
            }
            best.expect("tie class is non-empty")
        }
    }
}

fn discrete_order(colors: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..colors.len()).collect();
    order.sort_by_key(|&i| colors[i]);
    order
}

fn serialize(g: &MolecularGraph, order: &[usize]) -> String {
    let mut pos = vec![0usize; g.atom_count()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let mut out = String::new();
    for &i in order {
        let a = g.atoms()[i];
        out.push_str(a.element.symbol());
        out.push_str(&a.explicit_h.to_string());
        out.push(',');
    }
    out.push('|');
    let mut edges: Vec<(usize, usize, u8)> = g
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (pos[b.a], pos[b.b]);
            (x.min(y), x.max(y), b.order)
        })
        .collect();
    edges.sort_unstable();
    for (x, y, o) in edges {
        out.push_str(&format!("{x}-{y}:{o};"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Atom, Bond, Element, MolecularGraph};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn ethanol() -> MolecularGraph {
        let atoms = vec![
            Atom::new(Element::C, 3),
            Atom::new(Element::C, 2),
            Atom::new(Element::O, 1),
        ];
        MolecularGraph::new(atoms, vec![Bond::new(0, 1, 1), Bond::new(1, 2, 1)]).unwrap()
    }

    fn dimethyl_ether() -> MolecularGraph {
        let atoms = vec![
            Atom::new(Element::C, 3),
            Atom::new(Element::O, 0),
            Atom::new(Element::C, 3),
        ];
        MolecularGraph::new(atoms, vec![Bond::new(0, 1, 1), Bond::new(1, 2, 1)]).unwrap()
    }

    fn permute(g: &MolecularGraph, perm: &[usize]) -> MolecularGraph {
        // perm[old] = new
        let mut atoms = vec![g.atoms()[0]; g.atom_count()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = g.atoms()[old];
        }
        let bonds = g
            .bonds()
            .iter()
            .map(|b| Bond::new(perm[b.a], perm[b.b], b.order))
            .collect();
        MolecularGraph::new(atoms, bonds).unwrap()
    }

    #[test]
    fn permutation_invariant_key() {
        let g = ethanol();
        let h = permute(&g, &[2, 0, 1]);
        assert_eq!(canonical_key(&g), canonical_key(&h));
    }

    #[test]
    fn distinguishes_constitutional_isomers() {
        assert_ne!(canonical_key(&ethanol()), canonical_key(&dimethyl_ether()));
    }

    #[test]
    fn isomorphic_reflexive_and_shuffle() {
        let g = ethanol();
        assert!(isomorphic(&g, &g));
        assert!(isomorphic(&g, &permute(&g, &[1, 2, 0])));
    }

    #[test]
    fn butane_vs_isobutane() {
        let butane = {
            let mut atoms = vec![Atom::new(Element::C, 2); 4];
            atoms[0].explicit_h = 3;
            atoms[3].explicit_h = 3;
            MolecularGraph::new(
                atoms,
                vec![Bond::new(0, 1, 1), Bond::new(1, 2, 1), Bond::new(2, 3, 1)],
            )
            .unwrap()
        };
        let isobutane = {
            let mut atoms = vec![Atom::new(Element::C, 3); 4];
            atoms[0].explicit_h = 1;
            MolecularGraph::new(
                atoms,
                vec![Bond::new(0, 1, 1), Bond::new(0, 2, 1), Bond::new(0, 3, 1)],
            )
            .unwrap()
        };
        // oracle: exhaustive permutation matching on 4 atoms
        assert!(!brute_force_isomorphic(&butane, &isobutane));
        assert!(!isomorphic(&butane, &isobutane));
    }

    fn brute_force_isomorphic(a: &MolecularGraph, b: &MolecularGraph) -> bool {
        let n = a.atom_count();
        if n != b.atom_count() {
            return false;
        }
        let idx: Vec<usize> = (0..n).collect();
        permutations(&idx).into_iter().any(|perm| {
            (0..n).all(|i| a.atoms()[i] == b.atoms()[perm[i]])
                && a.bonds().iter().all(|bd| {
                    b.bond_between(perm[bd.a], perm[bd.b]) == Some(bd.order)
                })
                && a.bond_count() == b.bond_count()
        })
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn relabeling_fuzz_single_key() {
        // 20-atom molecule under many random relabelings yields one key
        let mut atoms = vec![Atom::new(Element::C, 2); 20];
        atoms[0].explicit_h = 3;
        atoms[19].explicit_h = 3;
        let mut bonds: Vec<Bond> = (1..20).map(|i| Bond::new(i - 1, i, 1)).collect();
        // add a ring and a heteroatom for structure
        bonds.push(Bond::new(4, 9, 1));
        atoms[4].explicit_h = 1;
        atoms[9].explicit_h = 1;
        atoms[12] = Atom::new(Element::N, 1);
        let g = MolecularGraph::new(atoms, bonds).unwrap();
        let key = canonical_key(&g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut perm: Vec<usize> = (0..20).collect();
            perm.shuffle(&mut rng);
            assert_eq!(canonical_key(&permute(&g, &perm)), key);
        }
    }

    #[test]
    fn highly_symmetric_graph_is_stable() {
        // benzene: every atom in one refinement class; individualization
        // must still produce a unique key
        let atoms = vec![Atom::new(Element::C, 1); 6];
        let bonds = (0..6)
            .map(|i| Bond::new(i, (i + 1) % 6, if i % 2 == 0 { 2 } else { 1 }))
            .collect();
        let g = MolecularGraph::new(atoms, bonds).unwrap();
        let key = canonical_key(&g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut perm: Vec<usize> = (0..6).collect();
            perm.shuffle(&mut rng);
            assert_eq!(canonical_key(&permute(&g, &perm)), key);
        }
    }
}
