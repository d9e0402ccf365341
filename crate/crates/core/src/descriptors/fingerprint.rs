//! Hashed circular (Morgan) fingerprints and Tanimoto similarity.

use crate::graph::{atom_ring_flags, MolecularGraph};
use thiserror::Error;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_NBITS: usize = 2048;

/// A folded substructure bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    bits: Vec<u64>,
    nbits: usize,
    radius: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

impl Fingerprint {
    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }
}

/// 64-bit mixing (splitmix64 finalizer); fixed so fingerprints are stable
/// across platforms and runs.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn combine(seed: u64, v: u64) -> u64 {
    mix(seed ^ v.wrapping_mul(0x9e3779b97f4a7c15))
}

/// Per-atom environment identifiers for radii `0..=radius`.
///
/// The radius-0 invariant hashes (element, heavy degree, hydrogen count,
/// ring membership); each iteration folds in the sorted multiset of
/// (bond order, neighbor id) pairs, which keeps the result independent of
/// atom numbering.
pub fn atom_environments(g: &MolecularGraph, radius: u32) -> Vec<Vec<u64>> {
    let ring = atom_ring_flags(g);
    let n = g.atom_count();
    let mut rounds: Vec<Vec<u64>> = Vec::with_capacity(radius as usize + 1);
    let init: Vec<u64> = (0..n)
        .map(|i| {
            let a = g.atoms()[i];
            let mut h = combine(0x6d6f6c67, a.element as u64);
            h = combine(h, g.degree(i) as u64);
            h = combine(h, a.explicit_h as u64);
            combine(h, ring[i] as u64)
        })
        .collect();
    rounds.push(init);
    for _ in 0..radius {
        let prev = rounds.last().expect("at least radius 0");
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut nbrs: Vec<(u8, u64)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(j, order)| (order, prev[j]))
                    .collect();
                nbrs.sort_unstable();
                let mut h = combine(0x756e666f, prev[i]);
                for (order, id) in nbrs {
                    h = combine(h, order as u64);
                    h = combine(h, id);
                }
                h
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

pub fn morgan_fingerprint(g: &MolecularGraph, radius: u32, nbits: usize) -> Fingerprint {
    let mut fp = Fingerprint {
        bits: vec![0u64; nbits.div_ceil(64)],
        nbits,
        radius,
    };
    for round in atom_environments(g, radius) {
        for id in round {
            fp.set((id % nbits as u64) as usize);
        }
    }
    fp
}

/// Morgan fingerprint with the community-default radius 2 and 2048 bits.
pub fn morgan_default(g: &MolecularGraph) -> Fingerprint {
    morgan_fingerprint(g, DEFAULT_RADIUS, DEFAULT_NBITS)
}

/// |a AND b| / |a OR b|; defined as 1 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::LengthMismatch(a.nbits, b.nbits));
    }
    let mut inter = 0u32;
    let mut union = 0u32;
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_smiles;

    #[test]
    fn isomorphic_graphs_same_fingerprint() {
        let a = parse_smiles("OCC").unwrap();
        let b = parse_smiles("CCO").unwrap();
        assert_eq!(morgan_default(&a), morgan_default(&b));
    }

    #[test]
    fn different_molecules_differ() {
        let a = parse_smiles("C").unwrap();
        let b = parse_smiles("c1ccccc1").unwrap();
        assert_ne!(morgan_default(&a), morgan_default(&b));
    }

    #[test]
    fn nonempty_molecule_sets_bits() {
        let g = parse_smiles("C").unwrap();
        assert!(morgan_default(&g).popcount() >= 1);
    }

    #[test]
    fn radius_zero_matches_atom_level_enumeration() {
        // at radius 0 the bits are exactly the per-atom invariant hashes
        let g = parse_smiles("CCO").unwrap();
        let fp = morgan_fingerprint(&g, 0, 512);
        let envs = atom_environments(&g, 0);
        let mut expect = Fingerprint {
            bits: vec![0u64; 8],
            nbits: 512,
            radius: 0,
        };
        for id in &envs[0] {
            expect.set((id % 512) as usize);
        }
        assert_eq!(fp, expect);
    }

    #[test]
    fn tanimoto_identities() {
        let a = morgan_default(&parse_smiles("CCO").unwrap());
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn tanimoto_hand_value() {
        // bit sets {1,2,3} vs {2,3,4}: intersection 2, union 4
        let mut a = Fingerprint {
            bits: vec![0; 1],
            nbits: 64,
            radius: 0,
        };
        let mut b = a.clone();
        for i in [1, 2, 3] {
            a.set(i);
        }
        for i in [2, 3, 4] {
            b.set(i);
        }
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn tanimoto_disjoint_and_empty() {
        let mut a = Fingerprint {
            bits: vec![0; 1],
            nbits: 64,
            radius: 0,
        };
        let mut b = a.clone();
        let empty = a.clone();
        a.set(0);
        b.set(1);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.0);
        assert_eq!(tanimoto(&empty, &empty).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_lengths_error() {
        let a = morgan_fingerprint(&parse_smiles("C").unwrap(), 2, 1024);
        let b = morgan_fingerprint(&parse_smiles("C").unwrap(), 2, 2048);
        assert!(tanimoto(&a, &b).is_err());
    }
}
