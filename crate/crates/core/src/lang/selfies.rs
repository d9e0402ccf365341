//! SELFIES derivation: a codec in which *every* sequence of non-special
//! tokens decodes to a valence-valid, connected molecular graph.
//!
//! Decoding rules (restricted to the supported element set):
//!
//! - Atom tokens place an atom and bond it to the current attachment point.
//!   The bond order is capped by the attachment's remaining valence and the
//!   new element's cap, so no token can overfill an atom.
//! - An atom token arriving when the current atom has zero remaining valence
//!   ends the current derivation level (remaining tokens at that level are
//!   ignored), which keeps every derived graph connected.
//! - `[Branch1]`/`[Branch2]` read one/two following index tokens as a branch
//!   length; the branch derives from the current atom and the chain resumes
//!   there. Missing index tokens degrade to no-ops; overlong lengths clip to
//!   the stream end; a branch needs two units of remaining valence or it is
//!   skipped.
//! - `[Ring1]`/`[Ring2]` read index tokens as a back-reference `v` and bond
//!   the current atom to the atom created `v` steps earlier. Out-of-range
//!   references, self-references and duplicate bonds are dropped.
//! - Bare index tokens and special tokens are no-ops.
//! - A sequence containing no atom token decodes to methane so that decoding
//!   is total onto valid molecules.
//!
//! Hydrogens are filled to the lowest standard valence state at the end.

use super::{BondPrefix, LangError, Token, TokenSeq};
use crate::graph::{
    implicit_h_fill, valence_cap, Atom, Bond, Element, MolecularGraph,
};

/// Split SELFIES text at bracket boundaries. Lossless: `detokenize` of the
/// result reproduces the input exactly.
pub fn tokenize_selfies(text: &str) -> Result<TokenSeq, LangError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes[pos] != b'[' {
            let span: String = text[pos..].chars().take(8).collect();
            return Err(LangError::Unbracketed { span, offset: pos });
        }
        let close = text[pos..]
            .find(']')
            .map(|i| pos + i)
            .ok_or_else(|| LangError::Unbracketed {
                span: text[pos..].chars().take(8).collect(),
                offset: pos,
            })?;
        let span = &text[pos..=close];
        let token = Token::from_text(span).ok_or_else(|| LangError::UnknownToken {
            span: span.to_string(),
            offset: pos,
        })?;
        tokens.push(token);
        pos = close + 1;
    }
    Ok(TokenSeq(tokens))
}

pub fn detokenize(seq: &TokenSeq) -> String {
    seq.tokens().iter().map(|t| t.to_string()).collect()
}

/// Derivation bookkeeping: the current attachment atom, the branch return
/// stack, and ring bonds placed so far (for duplicate suppression).
#[derive(Debug, Default)]
pub struct DerivationState {
    atoms: Vec<(Element, u32)>, // element, bond order used so far
    bonds: Vec<Bond>,
    bond_pairs: std::collections::HashSet<(usize, usize)>,
    /// Open branches as (return atom, tokens left in branch); depth is
    /// bounded by the sequence length.
    pub branch_stack: Vec<(usize, usize)>,
}

impl DerivationState {
    pub fn remaining_valence(&self, i: usize) -> u32 {
        valence_cap(self.atoms[i].0) as u32 - self.atoms[i].1
    }

    fn add_atom(&mut self, e: Element) -> usize {
        self.atoms.push((e, 0));
        self.atoms.len() - 1
    }

    fn add_bond(&mut self, a: usize, b: usize, order: u8) {
        self.atoms[a].1 += order as u32;
        self.atoms[b].1 += order as u32;
        self.bonds.push(Bond::new(a, b, order));
        self.bond_pairs.insert((a.min(b), a.max(b)));
    }

    fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bond_pairs.contains(&(a.min(b), a.max(b)))
    }

    fn into_graph(self) -> MolecularGraph {
        if self.atoms.is_empty() {
            return MolecularGraph::new(vec![Atom::saturated(Element::C)], vec![])
                .expect("methane is well-formed");
        }
        let atoms = self
            .atoms
            .iter()
            .map(|&(e, used)| Atom::new(e, implicit_h_fill(e, used).unwrap_or(0)))
            .collect();
        MolecularGraph::new(atoms, self.bonds).expect("derivation preserves structure")
    }
}

/// Decode any token sequence into a molecular graph. Total: never fails, and
/// the result always passes validation and is connected.
pub fn decode_selfies(seq: &TokenSeq) -> MolecularGraph {
    let mut state = DerivationState::default();
    derive(seq.tokens(), None, &mut state);
    state.into_graph()
}

/// Read `n` index tokens at `tokens[at..at+n]`.
///
/// `Ok(v)` if they are all present and are index tokens; `Err(true)` when the
/// stream is truncated (derivation stops); `Err(false)` when a non-index token
/// sits in the operand slot (operator becomes a no-op).
fn read_index(tokens: &[Token], at: usize, n: usize) -> Result<usize, bool> {
    if at + n > tokens.len() {
        return Err(true);
    }
    let mut value = 0usize;
    for k in 0..n {
        match tokens[at + k] {
            Token::Index(v) => value = value * 16 + (v as usize - 1),
            _ => return Err(false),
        }
    }
    Ok(value + 1)
}

fn derive(tokens: &[Token], attach: Option<usize>, state: &mut DerivationState) {
    let mut current = attach;
    let mut pos = 0;
    while pos < tokens.len() {
        match tokens[pos] {
            Token::Atom { element, prefix } => {
                match current {
                    None => current = Some(state.add_atom(element)),
                    Some(cur) => {
                        let rem = state.remaining_valence(cur);
                        if rem == 0 {
                            return; // derivation level exhausted
                        }
                        let order = (prefix.order() as u32)
                            .min(rem)
                            .min(valence_cap(element) as u32)
                            as u8;
                        let new = state.add_atom(element);
                        state.add_bond(cur, new, order);
                        current = Some(new);
                    }
                }
                pos += 1;
            }
            Token::Branch1 | Token::Branch2 => {
                let n = if tokens[pos] == Token::Branch1 { 1 } else { 2 };
                match read_index(tokens, pos + 1, n) {
                    Err(true) => return,
                    Err(false) => pos += 1,
                    Ok(len) => {
                        let body_start = pos + 1 + n;
                        let ok = current.is_some_and(|c| state.remaining_valence(c) >= 2);
                        if ok {
                            let body_end = (body_start + len).min(tokens.len());
                            state.branch_stack.push((
                                current.expect("checked above"),
                                body_end - body_start,
                            ));
                            derive(&tokens[body_start..body_end], current, state);
                            state.branch_stack.pop();
                            pos = body_end;
                        } else {
                            pos = body_start; // operator and operand skipped
                        }
                    }
                }
            }
            Token::Ring1(prefix) | Token::Ring2(prefix) => {
                let n = if matches!(tokens[pos], Token::Ring1(_)) { 1 } else { 2 };
                match read_index(tokens, pos + 1, n) {
                    Err(true) => return,
                    Err(false) => pos += 1,
                    Ok(back) => {
                        if let Some(cur) = current {
                            if cur >= back {
                                let target = cur - back;
                                if !state.has_bond(cur, target) {
                                    let order = (prefix.order() as u32)
                                        .min(state.remaining_valence(cur))
                                        .min(state.remaining_valence(target));
                                    if order >= 1 {
                                        state.add_bond(cur, target, order as u8);
                                    }
                                }
                            }
                        }
                        pos += 1 + n;
                    }
                }
            }
            // bare index tokens and specials are no-ops
            Token::Index(_) | Token::Start | Token::End | Token::Mask | Token::Pad => pos += 1,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("graph fails valence validation")]
    InvalidGraph,
    #[error("graph is disconnected; encode one fragment at a time")]
    Disconnected,
    #[error("graph is empty")]
    Empty,
    #[error("ring reference spans more than 256 atoms")]
    RingSpanTooLarge,
    #[error("branch longer than 256 tokens")]
    BranchTooLong,
}

/// Encode a valid, connected graph as SELFIES. `decode_selfies` of the result
/// is isomorphic to the input for hydrogen-saturated graphs (the form every
/// parser and decoder in this crate produces).
pub fn encode_selfies(g: &MolecularGraph) -> Result<TokenSeq, EncodeError> {
    if g.atom_count() == 0 {
        return Err(EncodeError::Empty);
    }
    if !crate::graph::validate(g).valid {
        return Err(EncodeError::InvalidGraph);
    }
    if !g.is_connected() {
        return Err(EncodeError::Disconnected);
    }

    // depth-first spanning tree from atom 0 so unbranched cycles become
    // plain chains with a single ring closure
    let n = g.atom_count();
    let mut parent = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ring_edges: Vec<(usize, usize, u8)> = Vec::new();
    let mut seen_ring = std::collections::HashSet::new();
    // (vertex, neighbor cursor)
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    visited[0] = true;
    while let Some(&(v, cursor)) = stack.last() {
        if cursor >= g.neighbors(v).len() {
            stack.pop();
            continue;
        }
        stack.last_mut().expect("nonempty").1 += 1;
        let (w, order) = g.neighbors(v)[cursor];
        if !visited[w] {
            visited[w] = true;
            parent[w] = v;
            children[v].push(w);
            stack.push((w, 0));
        } else if parent[v] != w && parent[w] != v && seen_ring.insert((v.min(w), v.max(w))) {
            ring_edges.push((v, w, order));
        }
    }

    // subtree atom counts let us emit the largest child last, keeping
    // branch operands small
    let mut subtree = vec![1usize; n];
    let mut order_post: Vec<usize> = Vec::with_capacity(n);
    {
        let mut stack = vec![(0usize, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                order_post.push(v);
                for &c in &children[v] {
                    subtree[v] += subtree[c];
                }
            } else {
                stack.push((v, true));
                for &c in &children[v] {
                    stack.push((c, false));
                }
            }
        }
    }
    for kids in children.iter_mut() {
        kids.sort_by_key(|&c| (subtree[c], c));
    }

    let mut creation_pos = vec![usize::MAX; n];
    let mut tokens = Vec::new();
    let mut counter = 0usize;
    emit(
        g,
        0,
        None,
        &children,
        &ring_edges,
        &mut creation_pos,
        &mut counter,
        &mut tokens,
    )?;
    Ok(TokenSeq(tokens))
}

fn index_tokens(value: usize) -> Result<Vec<Token>, ()> {
    if value == 0 {
        return Err(());
    }
    if value <= 16 {
        Ok(vec![Token::Index(value as u8)])
    } else if value <= 256 {
        let v = value - 1;
        Ok(vec![
            Token::Index((v / 16) as u8 + 1),
            Token::Index((v % 16) as u8 + 1),
        ])
    } else {
        Err(())
    }
}

fn branch_operator(len: usize) -> Result<Vec<Token>, EncodeError> {
    let idx = index_tokens(len).map_err(|_| EncodeError::BranchTooLong)?;
    let mut out = vec![if len <= 16 { Token::Branch1 } else { Token::Branch2 }];
    out.extend(idx);
    Ok(out)
}

fn ring_operator(back: usize, order: u8) -> Result<Vec<Token>, EncodeError> {
    let prefix = BondPrefix::from_order(order).expect("bond orders are 1..=3");
    let idx = index_tokens(back).map_err(|_| EncodeError::RingSpanTooLarge)?;
    let mut out = vec![if back <= 16 {
        Token::Ring1(prefix)
    } else {
        Token::Ring2(prefix)
    }];
    out.extend(idx);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn emit(
    g: &MolecularGraph,
    v: usize,
    parent_order: Option<u8>,
    children: &[Vec<usize>],
    ring_edges: &[(usize, usize, u8)],
    creation_pos: &mut [usize],
    counter: &mut usize,
    out: &mut Vec<Token>,
) -> Result<(), EncodeError> {
    let prefix = BondPrefix::from_order(parent_order.unwrap_or(1)).expect("order in 1..=3");
    out.push(Token::Atom {
        element: g.atoms()[v].element,
        prefix,
    });
    creation_pos[v] = *counter;
    *counter += 1;

    // close rings whose other endpoint is already created
    for &(a, b, order) in ring_edges {
        let other = if a == v { b } else if b == v { a } else { continue };
        if creation_pos[other] != usize::MAX && creation_pos[other] < creation_pos[v] {
            let back = creation_pos[v] - creation_pos[other];
            out.extend(ring_operator(back, order)?);
        }
    }

    let kids = &children[v];
    for (i, &c) in kids.iter().enumerate() {
        let order = g.bond_between(v, c).expect("tree edge exists");
        if i + 1 < kids.len() {
            // non-last children ride in branches
            let mut body = Vec::new();
            emit(g, c, Some(order), children, ring_edges, creation_pos, counter, &mut body)?;
            out.extend(branch_operator(body.len())?);
            out.extend(body);
        } else {
            emit(g, c, Some(order), children, ring_edges, creation_pos, counter, out)?;
        }
    }
    Ok(())
}
