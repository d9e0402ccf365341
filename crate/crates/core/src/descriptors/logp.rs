//! Octanol–water partition coefficient from an additive atom-contribution
//! model.
//!
//! Contribution values come from the published Wildman–Crippen table; the
//! atom typing is a documented simplification of the original SMARTS-based
//! scheme, keyed on element, aromaticity, neighbor composition and bond
//! pattern. Atoms that match no type fall back to a zero wildcard
//! contribution and are counted in the detailed report.

use super::aromatic::perceive_aromaticity;
use crate::graph::{Element, MolecularGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogpReport {
    pub value: f64,
    /// Atoms that hit the wildcard fallback.
    pub untyped_atoms: usize,
}

pub fn logp(g: &MolecularGraph) -> f64 {
    logp_detailed(g).value
}

pub fn logp_detailed(g: &MolecularGraph) -> LogpReport {
    if g.atom_count() == 0 {
        return LogpReport {
            value: 0.0,
            untyped_atoms: 0,
        };
    }
    let arom = perceive_aromaticity(g);
    let mut value = 0.0;
    let mut untyped = 0;
    for i in 0..g.atom_count() {
        let (heavy, flagged) = heavy_atom_contribution(g, i, &arom.atom_flags);
        if flagged {
            untyped += 1;
        }
        value += heavy;
        value += hydrogen_contribution(g.atoms()[i].element) * g.atoms()[i].explicit_h as f64;
    }
    LogpReport {
        value,
        untyped_atoms: untyped,
    }
}

fn hydrogen_contribution(attached_to: Element) -> f64 {
    match attached_to {
        Element::C => 0.1230,
        Element::N => 0.2142,
        Element::O => -0.2677,
        _ => 0.1125,
    }
}

fn heavy_atom_contribution(g: &MolecularGraph, i: usize, aromatic: &[bool]) -> (f64, bool) {
    let a = g.atoms()[i];
    let nbrs = g.neighbors(i);
    let has_hetero_neighbor = nbrs
        .iter()
        .any(|&(j, _)| g.atoms()[j].element.is_hetero());
    let max_order = nbrs.iter().map(|&(_, o)| o).max().unwrap_or(1);
    let heavy_deg = nbrs.len();

    let value = match a.element {
        Element::C => {
            if aromatic[i] {
                if a.explicit_h >= 1 {
                    0.1581 // ArC-H
                } else {
                    // classify by the non-ring substituent
                    let subst = nbrs
                        .iter()
                        .map(|&(j, _)| j)
                        .find(|&j| !aromatic[j])
                        .map(|j| g.atoms()[j].element);
                    match subst {
                        None => 0.2955,              // fused / bridgehead
                        Some(Element::C) => 0.1360,  // aliphatic carbon substituent
                        Some(Element::N) => 0.4619,
                        Some(Element::O) => 0.5437,
                        Some(Element::S) => 0.1893,
                        Some(Element::F) => 0.0,
                        Some(Element::Cl) => 0.2450,
                        Some(Element::Br) => 0.1980,
                        Some(Element::I) => 0.0,
                        Some(_) => 0.2955,
                    }
                }
            } else if max_order >= 3 {
                0.0017 // alkyne / nitrile carbon
            } else if max_order == 2 {
                let double_to_hetero = nbrs
                    .iter()
                    .any(|&(j, o)| o == 2 && g.atoms()[j].element.is_hetero());
                if double_to_hetero {
                    -0.2783 // carbonyl-like
                } else {
                    0.1551 // olefinic
                }
            } else if has_hetero_neighbor {
                if heavy_deg <= 2 {
                    -0.2035
                } else {
                    -0.2051
                }
            } else if heavy_deg <= 2 {
                0.1441
            } else {
                0.0
            }
        }
        Element::N => {
            if aromatic[i] {
                -0.3239
            } else if max_order >= 3 {
                0.01508 // nitrile nitrogen
            } else if max_order == 2 {
                if a.explicit_h >= 1 {
                    0.08387
                } else {
                    0.1836
                }
            } else {
                match heavy_deg {
                    0 | 1 => -1.0190,
                    2 => -0.7096,
                    _ => -0.3187,
                }
            }
        }
        Element::O => {
            if aromatic[i] {
                0.1552
            } else if max_order >= 2 {
                // carbonyl oxygen; amide oxygens differ
                let amide = nbrs.iter().any(|&(j, o)| {
                    o == 2
                        && g.neighbors(j)
                            .iter()
                            .any(|&(k, _)| g.atoms()[k].element == Element::N)
                });
                if amide {
                    0.1129
                } else {
                    -0.1526
                }
            } else if a.explicit_h >= 1 {
                -0.2893 // hydroxyl
            } else if heavy_deg >= 2 {
                -0.0684 // ether / ester
            } else {
                -0.1188
            }
        }
        Element::S => {
            if aromatic[i] {
                0.6237
            } else if max_order >= 2 {
                -0.0024
            } else {
                0.6482
            }
        }
        Element::P => 0.8612,
        Element::F => 0.4202,
        Element::Cl => 0.6895,
        Element::Br => 0.8456,
        Element::I => 0.8857,
        Element::B => return (0.0, true), // no published type; wildcard
    };
    (value, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_smiles;

    fn alkane(n: usize) -> MolecularGraph {
        parse_smiles(&"C".repeat(n)).unwrap()
    }

    #[test]
    fn hexane_matches_hand_sum() {
        // 6 primary/secondary carbons + 14 hydrocarbon hydrogens
        let expect = 6.0 * 0.1441 + 14.0 * 0.1230;
        assert!((logp(&alkane(6)) - expect).abs() < 1e-12);
    }

    #[test]
    fn ch2_increment_is_constant() {
        let delta = 0.1441 + 2.0 * 0.1230;
        for n in 5..10 {
            let d = logp(&alkane(n + 1)) - logp(&alkane(n));
            assert!((d - delta).abs() < 1e-9, "n={n} d={d}");
        }
    }

    #[test]
    fn empty_graph_is_zero() {
        assert_eq!(logp(&MolecularGraph::empty()), 0.0);
    }

    #[test]
    fn ethanol_reference_value() {
        // known Crippen value for ethanol
        let g = parse_smiles("CCO").unwrap();
        assert!((logp(&g) - (-0.0014)).abs() < 1e-4);
    }

    #[test]
    fn benzene_reference_value() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert!((logp(&g) - 1.6866).abs() < 1e-4);
    }

    #[test]
    fn permutation_invariant() {
        let a = parse_smiles("OC(C)c1ccccc1").unwrap();
        let b = parse_smiles("c1ccccc1C(C)O").unwrap();
        assert!((logp(&a) - logp(&b)).abs() < 1e-12);
    }

    #[test]
    fn boron_hits_wildcard() {
        let g = parse_smiles("CB").unwrap();
        assert_eq!(logp_detailed(&g).untyped_atoms, 1);
    }
}
