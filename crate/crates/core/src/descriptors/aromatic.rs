//! Aromatic-ring recovery on kekulized graphs.
//!
//! Internal representations are always kekulized, so descriptor code that
//! needs aromaticity (logP typing, QED's aromatic-ring count) re-derives it
//! with a structural rule: a 5- or 6-membered SSSR ring is aromatic when
//! every member is sp2-compatible — carbons carry a double bond to another
//! ring atom, while N, O and S may instead contribute a lone pair.

use crate::graph::{atom_ring_flags, ring_info, Element, MolecularGraph};

#[derive(Debug, Clone)]
pub struct Aromaticity {
    /// Indices of SSSR rings deemed aromatic.
    pub aromatic_rings: Vec<Vec<usize>>,
    /// Per-atom flag.
    pub atom_flags: Vec<bool>,
}

pub fn perceive_aromaticity(g: &MolecularGraph) -> Aromaticity {
    let info = ring_info(g);
    let ring_atom = atom_ring_flags(g);
    let n = g.atom_count();

    // does the atom have a double bond to another ring atom?
    let mut ring_double = vec![false; n];
    for b in g.bonds() {
        if b.order == 2 && ring_atom[b.a] && ring_atom[b.b] {
            ring_double[b.a] = true;
            ring_double[b.b] = true;
        }
    }

    let mut atom_flags = vec![false; n];
    let mut aromatic_rings = Vec::new();
    for ring in info.rings {
        if ring.len() < 5 || ring.len() > 6 {
            continue;
        }
        let ok = ring.iter().all(|&i| match g.atoms()[i].element {
            Element::C => ring_double[i],
            Element::N | Element::O | Element::S => true,
            _ => false,
        });
        if ok {
            for &i in &ring {
                atom_flags[i] = true;
            }
            aromatic_rings.push(ring);
        }
    }
    Aromaticity {
        aromatic_rings,
        atom_flags,
    }
}
