//! Chemically-aware molecular graph: atoms, bonds, valence bookkeeping.
//!
//! Every other subsystem consumes this representation. Graphs are immutable
//! values after construction and all operations here are pure functions.

mod canon;
mod rings;

pub use canon::{canonical_key, canonical_order, isomorphic};
pub use rings::{atom_ring_flags, bond_ring_flags, ring_info, RingInfo};

use thiserror::Error;

/// The supported element set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    B,
    C,
    N,
    O,
    S,
    P,
    F,
    Cl,
    Br,
    I,
}

pub const ELEMENTS: [Element; 10] = [
    Element::B,
    Element::C,
    Element::N,
    Element::O,
    Element::S,
    Element::P,
    Element::F,
    Element::Cl,
    Element::Br,
    Element::I,
];

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::S => "S",
            Element::P => "P",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        ELEMENTS.iter().copied().find(|e| e.symbol() == s)
    }

    /// Standard atomic weight in daltons.
    pub fn atomic_weight(self) -> f64 {
        match self {
            Element::B => 10.811,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::S => 32.06,
            Element::P => 30.974,
            Element::F => 18.998,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
        }
    }

    pub fn is_hetero(self) -> bool {
        self != Element::C
    }
}

/// Maximum-valence lookup for the supported element set.
///
/// Single fixed caps; multi-valent state lists for S and P are deliberately
/// not modeled.
#[derive(Debug, Clone)]
pub struct ValenceTable {
    caps: [u8; 10],
}

impl Default for ValenceTable {
    fn default() -> Self {
        // B:3 C:4 N:3 O:2 S:6 P:5 halogens:1
        ValenceTable {
            caps: [3, 4, 3, 2, 6, 5, 1, 1, 1, 1],
        }
    }
}

impl ValenceTable {
    pub fn cap(&self, e: Element) -> u8 {
        self.caps[e as usize]
    }
}

/// Shorthand for the default table's cap.
pub fn valence_cap(e: Element) -> u8 {
    ValenceTable::default().cap(e)
}

/// Hydrogen saturation: the number of hydrogens that fills an atom with the
/// given bond-order sum up to its lowest standard valence state.
///
/// Sulfur and phosphorus use their usual valence ladders (2/4/6 and 3/5) so
/// that e.g. a two-bonded sulfur becomes a sulfide rather than picking up four
/// hydrogens; the single-cap [`ValenceTable`] still governs validity checks.
/// Returns `None` when the bond-order sum exceeds every standard state.
pub fn implicit_h_fill(e: Element, bond_order_sum: u32) -> Option<u8> {
    let states: &[u32] = match e {
        Element::B => &[3],
        Element::C => &[4],
        Element::N => &[3],
        Element::O => &[2],
        Element::S => &[2, 4, 6],
        Element::P => &[3, 5],
        Element::F | Element::Cl | Element::Br | Element::I => &[1],
    };
    states
        .iter()
        .find(|&&v| v >= bond_order_sum)
        .map(|&v| (v - bond_order_sum) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    /// Count of attached hydrogens.
    pub explicit_h: u8,
}

impl Atom {
    pub fn new(element: Element, explicit_h: u8) -> Atom {
        Atom {
            element,
            explicit_h,
        }
    }

    /// Isolated atom saturated with hydrogens (lowest standard valence).
    pub fn saturated(element: Element) -> Atom {
        Atom {
            element,
            explicit_h: implicit_h_fill(element, 0).unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    /// Bond order in {1, 2, 3}.
    pub order: u8,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: u8) -> Bond {
        Bond { a, b, order }
    }

    fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("bond references atom {0} but graph has {1} atoms")]
    BondOutOfRange(usize, usize),
    #[error("self-loop bond on atom {0}")]
    SelfLoop(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("bond order {0} outside {{1,2,3}}")]
    BadBondOrder(u8),
}

/// An immutable molecular graph with cached adjacency.
///
/// Construction checks structural invariants only; valence is checked by
/// [`validate`], which reports rather than rejects, so chemically impossible
/// graphs are representable and diagnosable.
#[derive(Debug, Clone)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, u8)>>,
}

impl MolecularGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<MolecularGraph, GraphError> {
        let n = atoms.len();
        let mut seen = std::collections::HashSet::new();
        for b in &bonds {
            if b.a >= n {
                return Err(GraphError::BondOutOfRange(b.a, n));
            }
            if b.b >= n {
                return Err(GraphError::BondOutOfRange(b.b, n));
            }
            if b.a == b.b {
                return Err(GraphError::SelfLoop(b.a));
            }
            if !(1..=3).contains(&b.order) {
                return Err(GraphError::BadBondOrder(b.order));
            }
            if !seen.insert(b.key()) {
                return Err(GraphError::DuplicateBond(b.key().0, b.key().1));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for b in &bonds {
            adjacency[b.a].push((b.b, b.order));
            adjacency[b.b].push((b.a, b.order));
        }
        Ok(MolecularGraph {
            atoms,
            bonds,
            adjacency,
        })
    }

    pub fn empty() -> MolecularGraph {
        MolecularGraph {
            atoms: Vec::new(),
            bonds: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Neighbors of `i` as `(atom index, bond order)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, u8)] {
        &self.adjacency[i]
    }

    /// Heavy-atom degree.
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Sum of bond orders incident to atom `i`.
    pub fn bond_order_sum(&self, i: usize) -> u32 {
        self.adjacency[i].iter().map(|&(_, o)| o as u32).sum()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<u8> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, o)| o)
    }

    /// Connected components as lists of atom indices, in index order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Extract the induced subgraph on `keep` (indices into this graph),
    /// re-saturating hydrogens on atoms that lost bonds.
    pub fn induced_subgraph(&self, keep: &[usize]) -> MolecularGraph {
        let mut map = std::collections::HashMap::new();
        let mut atoms = Vec::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            map.insert(old, new);
            atoms.push(self.atoms[old]);
        }
        let mut bonds = Vec::new();
        for b in &self.bonds {
            if let (Some(&na), Some(&nb)) = (map.get(&b.a), map.get(&b.b)) {
                bonds.push(Bond::new(na, nb, b.order));
            }
        }
        let mut g = MolecularGraph::new(atoms, bonds).expect("induced subgraph is structurally ok");
        for i in 0..g.atoms.len() {
            let used = g.bond_order_sum(i);
            g.atoms[i].explicit_h = implicit_h_fill(g.atoms[i].element, used).unwrap_or(0);
        }
        g
    }
}

/// Per-atom valence slack plus an overall verdict.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    /// `cap - (bond order sum + explicit_h)` per atom; negative means overfull.
    pub atom_slack: Vec<i32>,
    pub valid: bool,
}

/// Check every atom against the valence table. Total: never fails on a
/// structurally well-formed graph; the report carries the verdict.
pub fn validate(g: &MolecularGraph) -> ValidityReport {
    let table = ValenceTable::default();
    let atom_slack: Vec<i32> = (0..g.atom_count())
        .map(|i| {
            let a = g.atoms[i];
            table.cap(a.element) as i32 - g.bond_order_sum(i) as i32 - a.explicit_h as i32
        })
        .collect();
    let valid = g.atom_count() >= 1 && atom_slack.iter().all(|&s| s >= 0);
    ValidityReport { atom_slack, valid }
}

/// Molecular weight in daltons: heavy atoms plus 1.008 per hydrogen.
pub fn molecular_weight(g: &MolecularGraph) -> f64 {
    let heavy: f64 = g.atoms.iter().map(|a| a.element.atomic_weight()).sum();
    let hydrogens: u32 = g.atoms.iter().map(|a| a.explicit_h as u32).sum();
    heavy + 1.008 * hydrogens as f64
}

/// Bertz-style complexity: a bond-connectivity information term plus a
/// heteroatom information term.
///
/// The connectivity term sums `log2(1 + deg(a)*deg(b))` over bonds, so it is
/// strictly increasing along homologous chain growth and monotone
/// non-decreasing under adding a bonded atom. The heteroatom term is atom
/// count times the Shannon entropy of the element multiset.
pub fn bertz_complexity(g: &MolecularGraph) -> f64 {
    if g.atom_count() == 0 {
        return 0.0;
    }
    let mut ct = 0.0;
    for b in &g.bonds {
        let d = (g.degree(b.a) * g.degree(b.b)) as f64;
        ct += (1.0 + d).log2();
    }
    let mut counts = std::collections::HashMap::new();
    for a in &g.atoms {
        *counts.entry(a.element).or_insert(0usize) += 1;
    }
    let n = g.atom_count() as f64;
    let entropy: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    ct + n * entropy
}

#[cfg(test)]
mod tests {
    use super::*;

    fn methane() -> MolecularGraph {
        MolecularGraph::new(vec![Atom::new(Element::C, 4)], vec![]).unwrap()
    }

    pub(crate) fn benzene() -> MolecularGraph {
        // kekulized: alternating single/double
        let atoms = vec![Atom::new(Element::C, 1); 6];
        let bonds = (0..6)
            .map(|i| Bond::new(i, (i + 1) % 6, if i % 2 == 0 { 2 } else { 1 }))
            .collect();
        MolecularGraph::new(atoms, bonds).unwrap()
    }

    pub(crate) fn chain(n: usize) -> MolecularGraph {
        let mut atoms = vec![Atom::new(Element::C, 3); 1];
        for _ in 1..n {
            atoms.push(Atom::new(Element::C, 2));
        }
        if n > 1 {
            atoms[n - 1].explicit_h = 3;
        }
        let bonds = (1..n).map(|i| Bond::new(i - 1, i, 1)).collect();
        MolecularGraph::new(atoms, bonds).unwrap()
    }

    #[test]
    fn methane_is_valid() {
        let r = validate(&methane());
        assert!(r.valid);
        assert_eq!(r.atom_slack, vec![0]);
    }

    #[test]
    fn pentavalent_carbon_has_negative_slack() {
        // center carbon with five single bonds to carbons
        let mut atoms = vec![Atom::new(Element::C, 0)];
        atoms.extend(vec![Atom::new(Element::C, 3); 5]);
        let bonds = (1..=5).map(|i| Bond::new(0, i, 1)).collect();
        let g = MolecularGraph::new(atoms, bonds).unwrap();
        let r = validate(&g);
        assert!(!r.valid);
        assert_eq!(r.atom_slack[0], -1);
    }

    #[test]
    fn benzene_valence_checks_out() {
        // hand sum: each carbon has one single + one double + 1 H = 4
        let r = validate(&benzene());
        assert!(r.valid);
        assert!(r.atom_slack.iter().all(|&s| s == 0));
    }

    #[test]
    fn empty_graph_is_invalid_but_total() {
        let r = validate(&MolecularGraph::empty());
        assert!(!r.valid);
    }

    #[test]
    fn weight_methane() {
        assert!((molecular_weight(&methane()) - 16.043).abs() < 0.01);
    }

    #[test]
    fn weight_empty() {
        assert_eq!(molecular_weight(&MolecularGraph::empty()), 0.0);
    }

    #[test]
    fn weight_ethanol() {
        // C2H6O = 46.07
        let atoms = vec![
            Atom::new(Element::C, 3),
            Atom::new(Element::C, 2),
            Atom::new(Element::O, 1),
        ];
        let bonds = vec![Bond::new(0, 1, 1), Bond::new(1, 2, 1)];
        let g = MolecularGraph::new(atoms, bonds).unwrap();
        assert!((molecular_weight(&g) - 46.07).abs() < 0.01);
    }

    #[test]
    fn weight_is_additive_over_components() {
        let atoms = vec![Atom::new(Element::C, 4), Atom::new(Element::O, 2)];
        let g = MolecularGraph::new(atoms, vec![]).unwrap();
        let a = MolecularGraph::new(vec![Atom::new(Element::C, 4)], vec![]).unwrap();
        let b = MolecularGraph::new(vec![Atom::new(Element::O, 2)], vec![]).unwrap();
        assert!((molecular_weight(&g) - molecular_weight(&a) - molecular_weight(&b)).abs() < 1e-12);
    }

    #[test]
    fn bertz_zero_for_single_atom() {
        assert_eq!(bertz_complexity(&methane()), 0.0);
    }

    #[test]
    fn bertz_strictly_increasing_on_alkanes() {
        let e = bertz_complexity(&chain(2));
        let p = bertz_complexity(&chain(3));
        let b = bertz_complexity(&chain(4));
        assert!(e < p && p < b, "{e} {p} {b}");
    }

    #[test]
    fn bertz_monotone_under_atom_addition() {
        for n in 2..10 {
            assert!(bertz_complexity(&chain(n)) <= bertz_complexity(&chain(n + 1)));
        }
    }

    #[test]
    fn structural_invariants_enforced() {
        let atoms = vec![Atom::new(Element::C, 4)];
        assert_eq!(
            MolecularGraph::new(atoms.clone(), vec![Bond::new(0, 1, 1)]).unwrap_err(),
            GraphError::BondOutOfRange(1, 1)
        );
        assert_eq!(
            MolecularGraph::new(atoms.clone(), vec![Bond::new(0, 0, 1)]).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        let two = vec![Atom::new(Element::C, 3); 2];
        assert_eq!(
            MolecularGraph::new(two, vec![Bond::new(0, 1, 1), Bond::new(1, 0, 1)]).unwrap_err(),
            GraphError::DuplicateBond(0, 1)
        );
    }

    #[test]
    fn disconnected_graph_is_flagged() {
        let atoms = vec![Atom::new(Element::C, 4), Atom::new(Element::C, 4)];
        let g = MolecularGraph::new(atoms, vec![]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.components().len(), 2);
    }
}
