//! Quantitative estimate of drug-likeness: a weighted geometric mean of eight
//! desirability functions (MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS) with
//! the published asymmetric-double-sigmoid parameters and weights.
//!
//! Descriptor conventions are documented simplifications: hydrogen-bond
//! rules are structural (no SMARTS library), polar surface area uses the
//! published additive N/O contributions, and the structural-alert list is a
//! curated 20-pattern subset of the full published set.

use super::aromatic::perceive_aromaticity;
use super::logp::logp;
use super::substructure::{contains, Pattern};
use crate::graph::{molecular_weight, Element, MolecularGraph};
use crate::lang::parse_smiles;
use std::sync::OnceLock;

/// Asymmetric double sigmoid parameters (a, b, c, d, e, f, dmax).
#[derive(Debug, Clone, Copy)]
pub struct AdsParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub dmax: f64,
}

pub fn ads(x: f64, p: &AdsParams) -> f64 {
    let exp1 = 1.0 + (-(x - p.c + p.d / 2.0) / p.e).exp();
    let exp2 = 1.0 + (-(x - p.c - p.d / 2.0) / p.f).exp();
    (p.a + p.b / exp1 * (1.0 - 1.0 / exp2)) / p.dmax
}

pub const ADS_MW: AdsParams = AdsParams {
    a: 2.817065973,
    b: 392.5754953,
    c: 290.7489764,
    d: 2.419764353,
    e: 49.22325677,
    f: 65.37051707,
    dmax: 104.9805561,
};
pub const ADS_ALOGP: AdsParams = AdsParams {
    a: 3.172690585,
    b: 137.8624751,
    c: 2.534937431,
    d: 4.581497897,
    e: 0.822739154,
    f: 0.576295591,
    dmax: 131.3186604,
};
pub const ADS_HBA: AdsParams = AdsParams {
    a: 2.948620388,
    b: 160.4605972,
    c: 3.615294657,
    d: 4.435986202,
    e: 0.290141953,
    f: 1.300669958,
    dmax: 148.7763046,
};
pub const ADS_HBD: AdsParams = AdsParams {
    a: 1.618662227,
    b: 1010.051101,
    c: 0.985094388,
    d: 0.000000001,
    e: 0.713820843,
    f: 0.920922555,
    dmax: 258.1632616,
};
pub const ADS_PSA: AdsParams = AdsParams {
    a: 1.876861559,
    b: 125.2232657,
    c: 62.90773554,
    d: 87.83366614,
    e: 12.01999824,
    f: 28.51324732,
    dmax: 104.5686167,
};
pub const ADS_ROTB: AdsParams = AdsParams {
    a: 0.010000000,
    b: 272.4121427,
    c: 2.558379970,
    d: 1.565547684,
    e: 1.271567166,
    f: 2.758063707,
    dmax: 105.4423817,
};
pub const ADS_AROM: AdsParams = AdsParams {
    a: 3.217788970,
    b: 957.7374108,
    c: 2.274627939,
    d: 0.000000001,
    e: 1.317690384,
    f: 0.375760881,
    dmax: 312.3372610,
};
pub const ADS_ALERTS: AdsParams = AdsParams {
    a: 0.010000000,
    b: 1199.094025,
    c: -0.09002883,
    d: 0.000000001,
    e: 0.185904477,
    f: 0.875193782,
    dmax: 417.7253140,
};

pub const QED_WEIGHTS: [f64; 8] = [0.66, 0.46, 0.05, 0.61, 0.06, 0.65, 0.48, 0.95];

/// The eight QED inputs in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QedDescriptors {
    pub mw: f64,
    pub alogp: f64,
    pub hba: usize,
    pub hbd: usize,
    pub psa: f64,
    pub rotb: usize,
    pub arom: usize,
    pub alerts: usize,
}

/// Hydrogen-bond donors: N or O atoms carrying at least one hydrogen.
pub fn hbd_count(g: &MolecularGraph) -> usize {
    g.atoms()
        .iter()
        .filter(|a| matches!(a.element, Element::N | Element::O) && a.explicit_h >= 1)
        .count()
}

/// Hydrogen-bond acceptors: every oxygen, plus nitrogens that are neither
/// pyrrole-type aromatic N-H nor amide/sulfonamide nitrogens.
pub fn hba_count(g: &MolecularGraph) -> usize {
    let arom = perceive_aromaticity(g);
    let mut count = 0;
    for (i, a) in g.atoms().iter().enumerate() {
        match a.element {
            Element::O => count += 1,
            Element::N => {
                if arom.atom_flags[i] && a.explicit_h >= 1 {
                    continue;
                }
                let amide = g.neighbors(i).iter().any(|&(j, o)| {
                    o == 1
                        && matches!(g.atoms()[j].element, Element::C | Element::S)
                        && g.neighbors(j).iter().any(|&(k, ko)| {
                            ko == 2 && g.atoms()[k].element == Element::O
                        })
                });
                if !amide {
                    count += 1;
                }
            }
            _ => {}
        }
    }
    count
}

/// Topological polar surface area from the published additive N/O
/// contributions (sulfur and phosphorus excluded, matching the convention
/// QED uses).
pub fn polar_surface_area(g: &MolecularGraph) -> f64 {
    let arom = perceive_aromaticity(g);
    let mut psa = 0.0;
    for (i, a) in g.atoms().iter().enumerate() {
        let heavy = g.degree(i);
        let h = a.explicit_h;
        let max_order = g.neighbors(i).iter().map(|&(_, o)| o).max().unwrap_or(1);
        match a.element {
            Element::N => {
                psa += if arom.atom_flags[i] {
                    if h >= 1 {
                        15.79
                    } else if heavy == 3 {
                        4.41
                    } else {
                        12.89
                    }
                } else if max_order >= 3 {
                    23.79
                } else if max_order == 2 {
                    if h >= 1 {
                        23.85
                    } else {
                        12.36
                    }
                } else {
                    match (heavy, h) {
                        (1, _) => 26.02,
                        (2, _) if h >= 1 => 12.03,
                        (2, _) => 12.03,
                        _ => 3.24,
                    }
                };
            }
            Element::O => {
                psa += if arom.atom_flags[i] {
                    13.14
                } else if max_order >= 2 {
                    17.07
                } else if h >= 1 {
                    20.23
                } else {
                    9.23
                };
            }
            _ => {}
        }
    }
    psa
}

/// Rotatable bonds: acyclic single bonds between heavy atoms of degree two or
/// more, excluding amide C–N bonds.
pub fn rotatable_bonds(g: &MolecularGraph) -> usize {
    let ring = crate::graph::bond_ring_flags(g);
    g.bonds()
        .iter()
        .enumerate()
        .filter(|&(i, b)| {
            if ring[i] || b.order != 1 || g.degree(b.a) < 2 || g.degree(b.b) < 2 {
                return false;
            }
            // amide exclusion: C(=O)-N
            let amide = |c: usize, n: usize| {
                g.atoms()[n].element == Element::N
                    && g.atoms()[c].element == Element::C
                    && g.neighbors(c)
                        .iter()
                        .any(|&(k, o)| o == 2 && g.atoms()[k].element == Element::O)
            };
            !(amide(b.a, b.b) || amide(b.b, b.a))
        })
        .count()
}

pub fn aromatic_ring_count(g: &MolecularGraph) -> usize {
    perceive_aromaticity(g).aromatic_rings.len()
}

struct AlertVariant {
    smiles: &'static str,
    min_h: &'static [(usize, u8)],
    acyclic: bool,
}

struct AlertDef {
    name: &'static str,
    variants: &'static [AlertVariant],
}

macro_rules! variant {
    ($smi:literal) => {
        AlertVariant { smiles: $smi, min_h: &[], acyclic: false }
    };
    ($smi:literal, h = $mh:expr) => {
        AlertVariant { smiles: $smi, min_h: $mh, acyclic: false }
    };
    ($smi:literal, acyclic) => {
        AlertVariant { smiles: $smi, min_h: &[], acyclic: true }
    };
}

/// The curated 20-alert subset (documented deviation from the full published
/// alert library).
const ALERTS: [AlertDef; 20] = [
    AlertDef { name: "acyl halide", variants: &[
        variant!("ClC=O"), variant!("BrC=O"), variant!("IC=O"), variant!("FC=O"),
    ]},
    AlertDef { name: "aldehyde", variants: &[variant!("C=O", h = &[(0, 1)])] },
    AlertDef { name: "thiol", variants: &[variant!("CS", h = &[(1, 1)])] },
    AlertDef { name: "azo", variants: &[variant!("N=N")] },
    AlertDef { name: "nitroso", variants: &[variant!("N=O")] },
    AlertDef { name: "peroxide", variants: &[variant!("OO")] },
    AlertDef { name: "disulfide", variants: &[variant!("SS")] },
    AlertDef { name: "hydrazine", variants: &[variant!("NN", h = &[(0, 1), (1, 1)])] },
    AlertDef { name: "isocyanate", variants: &[variant!("N=C=O")] },
    AlertDef { name: "thiocyanate", variants: &[variant!("SC#N"), variant!("N=C=S")] },
    AlertDef { name: "epoxide", variants: &[variant!("C1CO1")] },
    AlertDef { name: "aziridine", variants: &[variant!("C1CN1")] },
    AlertDef { name: "michael acceptor", variants: &[variant!("C=CC=O", acyclic)] },
    AlertDef { name: "quinone", variants: &[
        variant!("O=C1C=CC(=O)C=C1"), variant!("O=C1C(=O)C=CC=C1"),
    ]},
    AlertDef { name: "trihalomethyl", variants: &[
        variant!("ClC(Cl)Cl"), variant!("BrC(Br)Br"),
    ]},
    AlertDef { name: "phosphorus", variants: &[variant!("P", h = &[(0, 0)])] },
    AlertDef { name: "sulfonyl halide", variants: &[
        variant!("ClS(=O)=O"), variant!("BrS(=O)=O"), variant!("FS(=O)=O"),
    ]},
    AlertDef { name: "anhydride", variants: &[variant!("O=COC=O")] },
    AlertDef { name: "acyclic imine", variants: &[variant!("C=N", acyclic)] },
    AlertDef { name: "long aliphatic chain", variants: &[variant!("CCCCCCCC", acyclic)] },
];

fn compiled_alerts() -> &'static Vec<(&'static str, Vec<Pattern>)> {
    static CACHE: OnceLock<Vec<(&'static str, Vec<Pattern>)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        ALERTS
            .iter()
            .map(|def| {
                let pats = def
                    .variants
                    .iter()
                    .map(|v| {
                        Pattern::new(
                            parse_smiles(v.smiles).expect("alert patterns parse"),
                            v.min_h,
                            v.acyclic,
                        )
                    })
                    .collect();
                (def.name, pats)
            })
            .collect()
    })
}

/// Number of distinct structural alerts present.
pub fn alert_count(g: &MolecularGraph) -> usize {
    compiled_alerts()
        .iter()
        .filter(|(_, pats)| pats.iter().any(|p| contains(g, p)))
        .count()
}

pub fn qed_descriptors(g: &MolecularGraph) -> QedDescriptors {
    QedDescriptors {
        mw: molecular_weight(g),
        alogp: logp(g),
        hba: hba_count(g),
        hbd: hbd_count(g),
        psa: polar_surface_area(g),
        rotb: rotatable_bonds(g),
        arom: aromatic_ring_count(g),
        alerts: alert_count(g),
    }
}

/// Weighted geometric mean of the eight desirabilities; always in [0, 1].
pub fn qed_from_descriptors(d: &QedDescriptors) -> f64 {
    let values = [
        ads(d.mw, &ADS_MW),
        ads(d.alogp, &ADS_ALOGP),
        ads(d.hba as f64, &ADS_HBA),
        ads(d.hbd as f64, &ADS_HBD),
        ads(d.psa, &ADS_PSA),
        ads(d.rotb as f64, &ADS_ROTB),
        ads(d.arom as f64, &ADS_AROM),
        ads(d.alerts as f64, &ADS_ALERTS),
    ];
    let wsum: f64 = QED_WEIGHTS.iter().sum();
    let log_mean: f64 = values
        .iter()
        .zip(&QED_WEIGHTS)
        .map(|(v, w)| w * v.max(1e-12).ln())
        .sum::<f64>()
        / wsum;
    log_mean.exp().clamp(0.0, 1.0)
}

pub fn qed(g: &MolecularGraph) -> f64 {
    qed_from_descriptors(&qed_descriptors(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(smi: &str) -> MolecularGraph {
        parse_smiles(smi).unwrap()
    }

    #[test]
    fn descriptor_spot_checks() {
        let d = qed_descriptors(&g("CCO"));
        assert!((d.mw - 46.069).abs() < 1e-3);
        assert_eq!((d.hba, d.hbd, d.rotb, d.arom, d.alerts), (1, 1, 0, 0, 0));
        assert!((d.psa - 20.23).abs() < 1e-9);

        let d = qed_descriptors(&g("c1ccncc1"));
        assert_eq!((d.hba, d.hbd, d.arom), (1, 0, 1));
        assert!((d.psa - 12.89).abs() < 1e-9);

        let d = qed_descriptors(&g("CC(=O)O"));
        assert_eq!((d.hba, d.hbd), (2, 1));
        assert!((d.psa - 37.30).abs() < 1e-9);

        let d = qed_descriptors(&g("CCOCC"));
        assert_eq!((d.hba, d.hbd, d.rotb), (1, 0, 2));
    }

    #[test]
    fn amide_nitrogen_not_acceptor_or_rotor() {
        let d = qed_descriptors(&g("CC(=O)NC"));
        assert_eq!(d.hba, 1); // carbonyl O only
        assert_eq!(d.rotb, 0); // amide C-N excluded; others end in CH3
    }

    #[test]
    fn alerts_fire() {
        assert_eq!(alert_count(&g("CC=O")), 1); // aldehyde
        assert_eq!(alert_count(&g("CCS")), 1); // thiol
        assert_eq!(alert_count(&g("CCCCCCCCCC")), 1); // long chain
        assert_eq!(alert_count(&g("CCO")), 0);
        assert_eq!(alert_count(&g("c1ccccc1")), 0);
    }

    #[test]
    fn qed_always_in_unit_interval() {
        for smi in ["C", "CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "CCCCCCCCCCCCCCCC"] {
            let v = qed(&g(smi));
            assert!((0.0..=1.0).contains(&v), "{smi}: {v}");
        }
    }

    #[test]
    fn druglike_scores_higher_than_methane() {
        // ibuprofen-like molecule vs a gas
        assert!(qed(&g("CC(C)Cc1ccc(C(C)C(=O)O)cc1")) > qed(&g("C")));
    }
}
