//! A small substructure matcher for the structural-alert patterns.
//!
//! Patterns are molecular graphs with optional per-atom minimum hydrogen
//! counts and an optional requirement that every pattern bond maps onto a
//! non-ring target bond. Matching is plain backtracking subgraph search,
//! which is ample at alert-pattern sizes.

use crate::graph::{bond_ring_flags, MolecularGraph};

#[derive(Debug, Clone)]
pub struct Pattern {
    graph: MolecularGraph,
    min_h: Vec<u8>,
    acyclic_bonds_only: bool,
}

impl Pattern {
    pub fn new(graph: MolecularGraph, min_h_overrides: &[(usize, u8)], acyclic: bool) -> Pattern {
        let mut min_h = vec![0u8; graph.atom_count()];
        for &(i, h) in min_h_overrides {
            min_h[i] = h;
        }
        Pattern {
            graph,
            min_h,
            acyclic_bonds_only: acyclic,
        }
    }
}

pub fn contains(target: &MolecularGraph, pattern: &Pattern) -> bool {
    let pn = pattern.graph.atom_count();
    if pn == 0 || pn > target.atom_count() {
        return false;
    }
    let target_ring_bonds = if pattern.acyclic_bonds_only {
        bond_ring_flags(target)
    } else {
        Vec::new()
    };
    let mut mapping = vec![usize::MAX; pn];
    let mut used = vec![false; target.atom_count()];
    backtrack(
        pattern,
        target,
        &target_ring_bonds,
        0,
        &mut mapping,
        &mut used,
    )
}

fn compatible(
    pattern: &Pattern,
    target: &MolecularGraph,
    p: usize,
    t: usize,
) -> bool {
    let pa = pattern.graph.atoms()[p];
    let ta = target.atoms()[t];
    pa.element == ta.element
        && ta.explicit_h >= pattern.min_h[p]
        && target.degree(t) >= pattern.graph.degree(p)
}

fn backtrack(
    pattern: &Pattern,
    target: &MolecularGraph,
    target_ring_bonds: &[bool],
    p: usize,
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if p == pattern.graph.atom_count() {
        return true;
    }
    'candidates: for t in 0..target.atom_count() {
        if used[t] || !compatible(pattern, target, p, t) {
            continue;
        }
        // all pattern bonds from p to already-mapped atoms must exist with
        // the same order (and be acyclic in the target if required)
        for &(pq, order) in pattern.graph.neighbors(p) {
            if pq < p {
                let tq = mapping[pq];
                match target.bond_between(t, tq) {
                    Some(o) if o == order => {
                        if pattern.acyclic_bonds_only {
                            let idx = target
                                .bonds()
                                .iter()
                                .position(|b| {
                                    (b.a == t && b.b == tq) || (b.a == tq && b.b == t)
                                })
                                .expect("bond exists");
                            if target_ring_bonds[idx] {
                                continue 'candidates;
                            }
                        }
                    }
                    _ => continue 'candidates,
                }
            }
        }
        mapping[p] = t;
        used[t] = true;
        if backtrack(pattern, target, target_ring_bonds, p + 1, mapping, used) {
            return true;
        }
        mapping[p] = usize::MAX;
        used[t] = false;
    }
    false
}
