//! SMILES ingestion and canonical output.
//!
//! The dialect covers the supported element set: organic-subset atoms,
//! bracket atoms with explicit hydrogen counts (no charges, no isotopes, no
//! stereo), bonds `- = #`, branches, ring-closure digits (and `%NN`), dot
//! fragments, and lowercase aromatic `c n o s`. Aromatic rings are kekulized
//! on input via perfect matching; inputs that cannot be kekulized are
//! rejected. Output is always kekulized and derived from the canonical atom
//! order, so two isomorphic graphs print identically.

use crate::graph::{
    canonical_order, implicit_h_fill, valence_cap, Atom, Bond, Element, MolecularGraph,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmilesError {
    #[error("empty SMILES input")]
    Empty,
    #[error("unknown element or symbol {span:?} at offset {offset}")]
    UnknownElement { span: String, offset: usize },
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("unmatched ring closure digit {0}")]
    UnmatchedRingBond(u16),
    #[error("conflicting bond orders on ring closure {0}")]
    RingBondConflict(u16),
    #[error("valence violation on atom {atom} (bond order sum {sum})")]
    ValenceViolation { atom: usize, sum: u32 },
    #[error("aromatic atom {0} is not part of an aromatic ring system")]
    AromaticOutsideRing(usize),
    #[error("aromatic system cannot be kekulized")]
    CannotKekulize,
    #[error("bond symbol with no preceding atom")]
    DanglingBond,
    #[error("malformed bracket atom at offset {0}")]
    BadBracket(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BondTok {
    Single,
    Double,
    Triple,
}

impl BondTok {
    fn order(self) -> u8 {
        match self {
            BondTok::Single => 1,
            BondTok::Double => 2,
            BondTok::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ParsedAtom {
    element: Element,
    aromatic: bool,
    bracket_h: Option<u8>,
}

/// A parsed bond; `explicit` is None for bonds written implicitly, which
/// become aromatic candidates when both endpoints are aromatic.
#[derive(Debug, Clone, Copy)]
struct ParsedBond {
    a: usize,
    b: usize,
    explicit: Option<BondTok>,
}

pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut atoms: Vec<ParsedAtom> = Vec::new();
    let mut bonds: Vec<ParsedBond> = Vec::new();
    let mut stack: Vec<Option<usize>> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<BondTok> = None;
    // ring digit -> (atom, bond symbol written at open, if any)
    let mut open_rings: std::collections::HashMap<u16, (usize, Option<BondTok>)> =
        std::collections::HashMap::new();

    let bytes = text.as_bytes();
    let mut pos = 0;

    let attach = |atoms: &mut Vec<ParsedAtom>,
                      bonds: &mut Vec<ParsedBond>,
                      prev: &mut Option<usize>,
                      pending: &mut Option<BondTok>,
                      atom: ParsedAtom| {
        let id = atoms.len();
        atoms.push(atom);
        if let Some(p) = *prev {
            bonds.push(ParsedBond {
                a: p,
                b: id,
                explicit: pending.take(),
            });
        }
        *prev = Some(id);
        id
    };

    while pos < bytes.len() {
        let c = bytes[pos] as char;
        match c {
            '-' | '=' | '#' => {
                if prev.is_none() {
                    return Err(SmilesError::DanglingBond);
                }
                pending = Some(match c {
                    '-' => BondTok::Single,
                    '=' => BondTok::Double,
                    _ => BondTok::Triple,
                });
                pos += 1;
            }
            '(' => {
                if prev.is_none() {
                    return Err(SmilesError::UnbalancedParens);
                }
                stack.push(prev);
                pos += 1;
            }
            ')' => {
                prev = stack.pop().ok_or(SmilesError::UnbalancedParens)?;
                pos += 1;
            }
            '.' => {
                prev = None;
                pending = None;
                pos += 1;
            }
            '1'..='9' | '%' => {
                let (digit, width) = if c == '%' {
                    if pos + 2 >= bytes.len()
                        || !bytes[pos + 1].is_ascii_digit()
                        || !bytes[pos + 2].is_ascii_digit()
                    {
                        return Err(SmilesError::UnknownElement {
                            span: "%".into(),
                            offset: pos,
                        });
                    }
                    (
                        (bytes[pos + 1] - b'0') as u16 * 10 + (bytes[pos + 2] - b'0') as u16,
                        3,
                    )
                } else {
                    ((bytes[pos] - b'0') as u16, 1)
                };
                let cur = prev.ok_or(SmilesError::DanglingBond)?;
                match open_rings.remove(&digit) {
                    None => {
                        open_rings.insert(digit, (cur, pending.take()));
                    }
                    Some((other, open_tok)) => {
                        let close_tok = pending.take();
                        let explicit = match (open_tok, close_tok) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::RingBondConflict(digit));
                            }
                            (a, b) => a.or(b),
                        };
                        bonds.push(ParsedBond {
                            a: other,
                            b: cur,
                            explicit,
                        });
                    }
                }
                pos += width;
            }
            '[' => {
                let close = text[pos..]
                    .find(']')
                    .map(|i| pos + i)
                    .ok_or(SmilesError::BadBracket(pos))?;
                let inner = &text[pos + 1..close];
                let atom = parse_bracket(inner, pos)?;
                attach(&mut atoms, &mut bonds, &mut prev, &mut pending, atom);
                pos = close + 1;
            }
            _ => {
                let (atom, width) = parse_organic(text, pos)?;
                attach(&mut atoms, &mut bonds, &mut prev, &mut pending, atom);
                pos += width;
            }
        }
    }

    if !stack.is_empty() {
        return Err(SmilesError::UnbalancedParens);
    }
    if let Some(&digit) = open_rings.keys().min() {
        return Err(SmilesError::UnmatchedRingBond(digit));
    }

    finish(atoms, bonds)
}

fn parse_bracket(inner: &str, offset: usize) -> Result<ParsedAtom, SmilesError> {
    // [<symbol>] or [<symbol>H] or [<symbol>H<n>]
    let (sym, rest) = inner
        .char_indices()
        .take_while(|&(i, ch)| {
            (i == 0 && ch.is_ascii_alphabetic()) || (i == 1 && ch.is_ascii_lowercase() && ch != 'h')
        })
        .last()
        .map(|(i, ch)| inner.split_at(i + ch.len_utf8()))
        .ok_or(SmilesError::BadBracket(offset))?;
    let (element, aromatic) = lookup_symbol(sym).ok_or_else(|| SmilesError::UnknownElement {
        span: sym.to_string(),
        offset,
    })?;
    let h = if rest.is_empty() {
        0
    } else if let Some(count) = rest.strip_prefix('H') {
        if count.is_empty() {
            1
        } else {
            count
                .parse::<u8>()
                .map_err(|_| SmilesError::BadBracket(offset))?
        }
    } else {
        return Err(SmilesError::BadBracket(offset));
    };
    Ok(ParsedAtom {
        element,
        aromatic,
        bracket_h: Some(h),
    })
}

fn parse_organic(text: &str, pos: usize) -> Result<(ParsedAtom, usize), SmilesError> {
    let rest = &text[pos..];
    // two-letter symbols first
    for sym in ["Cl", "Br"] {
        if rest.starts_with(sym) {
            return Ok((
                ParsedAtom {
                    element: Element::from_symbol(sym).expect("known"),
                    aromatic: false,
                    bracket_h: None,
                },
                2,
            ));
        }
    }
    let c = rest.chars().next().expect("pos in bounds");
    if let Some((element, aromatic)) = lookup_symbol(&c.to_string()) {
        return Ok((
            ParsedAtom {
                element,
                aromatic,
                bracket_h: None,
            },
            1,
        ));
    }
    Err(SmilesError::UnknownElement {
        span: c.to_string(),
        offset: pos,
    })
}

fn lookup_symbol(sym: &str) -> Option<(Element, bool)> {
    if let Some(e) = Element::from_symbol(sym) {
        return Some((e, false));
    }
    match sym {
        "c" => Some((Element::C, true)),
        "n" => Some((Element::N, true)),
        "o" => Some((Element::O, true)),
        "s" => Some((Element::S, true)),
        _ => None,
    }
}

/// Kekulize, fill hydrogens, and run the final valence check.
fn finish(atoms: Vec<ParsedAtom>, bonds: Vec<ParsedBond>) -> Result<MolecularGraph, SmilesError> {
    let n = atoms.len();
    let mut order: Vec<Option<u8>> = bonds
        .iter()
        .map(|b| match b.explicit {
            Some(t) => Some(t.order()),
            None => {
                if atoms[b.a].aromatic && atoms[b.b].aromatic {
                    None // aromatic candidate, resolved by matching
                } else {
                    Some(1)
                }
            }
        })
        .collect();

    // an aromatic atom must sit in a ring system: at least two aromatic bonds
    let mut aromatic_deg = vec![0usize; n];
    for (i, b) in bonds.iter().enumerate() {
        if order[i].is_none() {
            aromatic_deg[b.a] += 1;
            aromatic_deg[b.b] += 1;
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if a.aromatic && aromatic_deg[i] < 2 {
            return Err(SmilesError::AromaticOutsideRing(i));
        }
    }

    // which aromatic atoms need one double bond
    let mut heavy_deg = vec![0u32; n];
    for b in &bonds {
        heavy_deg[b.a] += 1;
        heavy_deg[b.b] += 1;
    }
    let needs_pi: Vec<bool> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            a.aromatic
                && match a.element {
                    Element::C => true,
                    Element::N => heavy_deg[i] + a.bracket_h.unwrap_or(0) as u32 == 2,
                    _ => false,
                }
        })
        .collect();

    // perfect matching over aromatic bonds joining two pi-seeking atoms
    let mut mate = vec![usize::MAX; n];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (neighbor, bond idx)
    for (i, b) in bonds.iter().enumerate() {
        if order[i].is_none() && needs_pi[b.a] && needs_pi[b.b] {
            adj[b.a].push((b.b, i));
            adj[b.b].push((b.a, i));
        }
    }
    for v in 0..n {
        if needs_pi[v] && mate[v] == usize::MAX {
            let mut visited = vec![false; n];
            if !augment(v, &adj, &mut mate, &mut visited) {
                return Err(SmilesError::CannotKekulize);
            }
        }
    }
    for (i, b) in bonds.iter().enumerate() {
        if order[i].is_none() {
            order[i] = Some(if mate[b.a] == b.b { 2 } else { 1 });
        }
    }

    let final_bonds: Vec<Bond> = bonds
        .iter()
        .zip(&order)
        .map(|(b, o)| Bond::new(b.a, b.b, o.expect("all orders resolved")))
        .collect();
    let mut sums = vec![0u32; n];
    for b in &final_bonds {
        sums[b.a] += b.order as u32;
        sums[b.b] += b.order as u32;
    }
    let mut final_atoms = Vec::with_capacity(n);
    for (i, a) in atoms.iter().enumerate() {
        let h = match a.bracket_h {
            Some(h) => {
                if sums[i] + h as u32 > valence_cap(a.element) as u32 {
                    return Err(SmilesError::ValenceViolation {
                        atom: i,
                        sum: sums[i] + h as u32,
                    });
                }
                h
            }
            None => implicit_h_fill(a.element, sums[i]).ok_or(SmilesError::ValenceViolation {
                atom: i,
                sum: sums[i],
            })?,
        };
        final_atoms.push(Atom::new(a.element, h));
    }
    MolecularGraph::new(final_atoms, final_bonds).map_err(|_| SmilesError::ValenceViolation {
        atom: 0,
        sum: 0,
    })
}

/// Alternating-path augmentation for the kekulization matching.
fn augment(
    v: usize,
    adj: &[Vec<(usize, usize)>],
    mate: &mut [usize],
    visited: &mut [bool],
) -> bool {
    for &(w, _) in &adj[v] {
        if visited[w] {
            continue;
        }
        visited[w] = true;
        if mate[w] == usize::MAX || augment(mate[w], adj, mate, visited) {
            mate[w] = v;
            mate[v] = w;
            return true;
        }
    }
    false
}

/// Write canonical, kekulized SMILES. The traversal follows the canonical
/// atom order, so isomorphic graphs produce identical text. Atoms whose
/// hydrogen count differs from the implicit fill are written in brackets.
pub fn write_smiles(g: &MolecularGraph) -> String {
    if g.atom_count() == 0 {
        return String::new();
    }
    let order = canonical_order(g);
    let mut rank = vec![0usize; g.atom_count()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    // ring bonds: DFS in canonical-rank order, non-tree edges get digits
    let n = g.atom_count();
    let mut visited = vec![false; n];
    let mut out = String::new();
    let mut ring_digits: std::collections::HashMap<(usize, usize), u16> =
        std::collections::HashMap::new();
    let mut next_digit: u16 = 1;
    let mut free_digits: Vec<u16> = Vec::new();

    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by_key(|&i| rank[i]);

    let mut first_component = true;
    for root in roots {
        if visited[root] {
            continue;
        }
        if !first_component {
            out.push('.');
        }
        first_component = false;
        // discover tree + ring edges for this component
        let mut tree_children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut ring_edges: Vec<(usize, usize)> = Vec::new();
        {
            let mut seen = std::collections::HashSet::new();
            let mut stack = vec![root];
            let mut parent = vec![usize::MAX; n];
            visited[root] = true;
            while let Some(v) = stack.pop() {
                let mut nbrs: Vec<usize> = g.neighbors(v).iter().map(|&(w, _)| w).collect();
                nbrs.sort_by_key(|&w| std::cmp::Reverse(rank[w]));
                for w in nbrs {
                    if !visited[w] {
                        visited[w] = true;
                        parent[w] = v;
                        tree_children[v].push(w);
                        stack.push(w);
                    } else if parent[v] != w
                        && parent[w] != v
                        && seen.insert((v.min(w), v.max(w)))
                    {
                        ring_edges.push((v, w));
                    }
                }
            }
            for kids in tree_children.iter_mut() {
                kids.sort_by_key(|&w| rank[w]);
            }
        }
        write_atom_rec(
            g,
            root,
            None,
            &tree_children,
            &ring_edges,
            &mut ring_digits,
            &mut next_digit,
            &mut free_digits,
            &mut out,
        );
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn write_atom_rec(
    g: &MolecularGraph,
    v: usize,
    bond_from_parent: Option<u8>,
    children: &[Vec<usize>],
    ring_edges: &[(usize, usize)],
    ring_digits: &mut std::collections::HashMap<(usize, usize), u16>,
    next_digit: &mut u16,
    free_digits: &mut Vec<u16>,
    out: &mut String,
) {
    if let Some(o) = bond_from_parent {
        out.push_str(bond_glyph(o));
    }
    out.push_str(&atom_text(g, v));

    for &(a, b) in ring_edges {
        if a != v && b != v {
            continue;
        }
        let other = if a == v { b } else { a };
        let key = (v.min(other), v.max(other));
        let order = g.bond_between(v, other).expect("ring edge exists");
        match ring_digits.get(&key).copied() {
            None => {
                let d = free_digits.pop().unwrap_or_else(|| {
                    let d = *next_digit;
                    *next_digit += 1;
                    d
                });
                ring_digits.insert(key, d);
                out.push_str(bond_glyph(order));
                push_digit(out, d);
            }
            Some(d) => {
                // bond symbol was written at the opening side
                push_digit(out, d);
                free_digits.push(d);
            }
        }
    }

    let kids = &children[v];
    for (i, &c) in kids.iter().enumerate() {
        let order = g.bond_between(v, c).expect("tree edge exists");
        if i + 1 < kids.len() {
            out.push('(');
            write_atom_rec(
                g, c, Some(order), children, ring_edges, ring_digits, next_digit, free_digits, out,
            );
            out.push(')');
        } else {
            write_atom_rec(
                g, c, Some(order), children, ring_edges, ring_digits, next_digit, free_digits, out,
            );
        }
    }
}

fn bond_glyph(order: u8) -> &'static str {
    match order {
        2 => "=",
        3 => "#",
        _ => "",
    }
}

fn push_digit(out: &mut String, d: u16) {
    if d < 10 {
        out.push_str(&d.to_string());
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn atom_text(g: &MolecularGraph, v: usize) -> String {
    let a = g.atoms()[v];
    let implied = implicit_h_fill(a.element, g.bond_order_sum(v));
    if implied == Some(a.explicit_h) {
        a.element.symbol().to_string()
    } else {
        match a.explicit_h {
            0 => format!("[{}]", a.element.symbol()),
            1 => format!("[{}H]", a.element.symbol()),
            h => format!("[{}H{}]", a.element.symbol(), h),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{isomorphic, molecular_weight, validate};

    #[test]
    fn ethanol_parses() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.bond_count(), 2);
        assert!(validate(&g).valid);
        assert!((molecular_weight(&g) - 46.07).abs() < 0.01);
    }

    #[test]
    fn unmatched_ring_digit_rejected() {
        assert_eq!(
            parse_smiles("C1CC").unwrap_err(),
            SmilesError::UnmatchedRingBond(1)
        );
    }

    #[test]
    fn pentavalent_carbon_rejected() {
        let err = parse_smiles("C(C)(C)(C)(C)C").unwrap_err();
        assert_eq!(err, SmilesError::ValenceViolation { atom: 0, sum: 5 });
    }

    #[test]
    fn unbalanced_parens_rejected() {
        assert_eq!(
            parse_smiles("C(CO").unwrap_err(),
            SmilesError::UnbalancedParens
        );
        assert_eq!(
            parse_smiles("CC)O").unwrap_err(),
            SmilesError::UnbalancedParens
        );
    }

    #[test]
    fn unknown_element_rejected() {
        assert!(matches!(
            parse_smiles("CXC").unwrap_err(),
            SmilesError::UnknownElement { .. }
        ));
    }

    #[test]
    fn benzene_kekulizes() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert!(validate(&g).valid);
        let doubles = g.bonds().iter().filter(|b| b.order == 2).count();
        assert_eq!(doubles, 3);
        assert!(g.atoms().iter().all(|a| a.explicit_h == 1));
    }

    #[test]
    fn pyridine_and_furan_kekulize() {
        let py = parse_smiles("c1ccncc1").unwrap();
        assert!(validate(&py).valid);
        assert_eq!(py.bonds().iter().filter(|b| b.order == 2).count(), 3);

        let furan = parse_smiles("c1ccoc1").unwrap();
        assert!(validate(&furan).valid);
        assert_eq!(furan.bonds().iter().filter(|b| b.order == 2).count(), 2);
    }

    #[test]
    fn pyrrole_needs_bracket_nh() {
        let g = parse_smiles("c1cc[nH]c1").unwrap();
        assert!(validate(&g).valid);
        let n = g
            .atoms()
            .iter()
            .position(|a| a.element == Element::N)
            .unwrap();
        assert_eq!(g.atoms()[n].explicit_h, 1);
    }

    #[test]
    fn naphthalene_kekulizes() {
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert!(validate(&g).valid);
        assert_eq!(g.bonds().iter().filter(|b| b.order == 2).count(), 5);
    }

    #[test]
    fn aromatic_chain_rejected() {
        assert!(matches!(
            parse_smiles("cc").unwrap_err(),
            SmilesError::AromaticOutsideRing(_)
        ));
    }

    #[test]
    fn sulfur_hydrogen_fill_uses_valence_ladder() {
        let g = parse_smiles("CS").unwrap();
        let s = g
            .atoms()
            .iter()
            .position(|a| a.element == Element::S)
            .unwrap();
        assert_eq!(g.atoms()[s].explicit_h, 1); // methanethiol, not SH5
        let sulfone = parse_smiles("CS(=O)(=O)C").unwrap();
        assert!(validate(&sulfone).valid);
    }

    #[test]
    fn writer_is_canonical() {
        let a = parse_smiles("OCC").unwrap();
        let b = parse_smiles("CCO").unwrap();
        assert_eq!(write_smiles(&a), write_smiles(&b));
    }

    #[test]
    fn writer_roundtrips() {
        for smi in [
            "C",
            "CCO",
            "c1ccccc1",
            "CC(=O)O",
            "C1CCCCC1",
            "c1ccc2ccccc2c1",
            "CC(C)Cc1ccc(C(C)C(=O)O)cc1", // ibuprofen
            "N#Cc1ccccc1",
            "ClC(Cl)Cl",
            "C[SH](C)C",
        ] {
            let g = parse_smiles(smi).unwrap();
            let text = write_smiles(&g);
            let h = parse_smiles(&text).unwrap_or_else(|e| panic!("{smi} -> {text}: {e}"));
            assert!(isomorphic(&g, &h), "{smi} -> {text}");
        }
    }

    #[test]
    fn methane_writes_plain() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(write_smiles(&g), "C");
    }

    #[test]
    fn dot_makes_fragments() {
        let g = parse_smiles("C.C").unwrap();
        assert_eq!(g.components().len(), 2);
        assert!(!g.is_connected());
    }

    #[test]
    fn double_bond_ring_closure() {
        // cyclohexene written with the double bond on the ring closure
        let g = parse_smiles("C=1CCCCC=1").unwrap();
        assert!(validate(&g).valid);
        assert_eq!(g.bonds().iter().filter(|b| b.order == 2).count(), 1);
        assert!(parse_smiles("C=1CCCCC#1").is_err());
    }
}
