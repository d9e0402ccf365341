//! Molecular string languages: token vocabulary, the SELFIES codec (total by
//! construction), a SMILES parser/writer, and the mutation-robustness harness.

mod mutate;
mod selfies;
mod smiles;

pub use mutate::{
    mutate_smiles, mutate_tokens, mutation_validity_rate, Language, SMILES_MUTATION_CHARS,
};
pub use selfies::{decode_selfies, detokenize, encode_selfies, tokenize_selfies, DerivationState};
pub use smiles::{parse_smiles, write_smiles, SmilesError};

use crate::graph::{Element, ELEMENTS};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Bond-order prefix carried by atom and ring tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondPrefix {
    Single,
    Double,
    Triple,
}

impl BondPrefix {
    pub fn order(self) -> u8 {
        match self {
            BondPrefix::Single => 1,
            BondPrefix::Double => 2,
            BondPrefix::Triple => 3,
        }
    }

    pub fn from_order(order: u8) -> Option<BondPrefix> {
        match order {
            1 => Some(BondPrefix::Single),
            2 => Some(BondPrefix::Double),
            3 => Some(BondPrefix::Triple),
            _ => None,
        }
    }

    fn glyph(self) -> &'static str {
        match self {
            BondPrefix::Single => "",
            BondPrefix::Double => "=",
            BondPrefix::Triple => "#",
        }
    }
}

/// One vocabulary unit. Every non-special token maps to exactly one
/// derivation action; specials are sequence bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    /// `<s>` — sequence start.
    Start,
    /// `</s>` — sequence end.
    End,
    /// `[MASK]` — corruption placeholder.
    Mask,
    /// `<pad>` — batch padding.
    Pad,
    /// `[C]`, `[=C]`, `[#C]`, ... — place an atom, bonding to the current one.
    Atom { element: Element, prefix: BondPrefix },
    /// `[Branch1]` — open a branch whose length is the next index token.
    Branch1,
    /// `[Branch2]` — as above with a two-token (base-16) length.
    Branch2,
    /// `[Ring1]`, `[=Ring1]`, `[#Ring1]` — close a ring to the atom `v` steps
    /// back in creation order, `v` from the next index token.
    Ring1(BondPrefix),
    /// `[Ring2]` variants with a two-token back-reference.
    Ring2(BondPrefix),
    /// `[1]`..`[16]` — operand for branch lengths and ring references.
    Index(u8),
}

pub const SPECIALS: [Token; 4] = [Token::Start, Token::End, Token::Mask, Token::Pad];

impl Token {
    pub fn is_special(self) -> bool {
        matches!(self, Token::Start | Token::End | Token::Mask | Token::Pad)
    }

    pub fn atom(element: Element) -> Token {
        Token::Atom {
            element,
            prefix: BondPrefix::Single,
        }
    }

    /// Parse a single token from its text form.
    pub fn from_text(s: &str) -> Option<Token> {
        match s {
            "<s>" => return Some(Token::Start),
            "</s>" => return Some(Token::End),
            "<pad>" => return Some(Token::Pad),
            "[MASK]" => return Some(Token::Mask),
            _ => {}
        }
        let inner = s.strip_prefix('[')?.strip_suffix(']')?;
        match inner {
            "Branch1" => return Some(Token::Branch1),
            "Branch2" => return Some(Token::Branch2),
            _ => {}
        }
        let (prefix, rest) = if let Some(r) = inner.strip_prefix('=') {
            (BondPrefix::Double, r)
        } else if let Some(r) = inner.strip_prefix('#') {
            (BondPrefix::Triple, r)
        } else {
            (BondPrefix::Single, inner)
        };
        match rest {
            "Ring1" => return Some(Token::Ring1(prefix)),
            "Ring2" => return Some(Token::Ring2(prefix)),
            _ => {}
        }
        if prefix == BondPrefix::Single {
            if let Ok(v) = inner.parse::<u8>() {
                if (1..=16).contains(&v) {
                    return Some(Token::Index(v));
                }
            }
        }
        Element::from_symbol(rest).map(|element| Token::Atom { element, prefix })
    }

    /// The full non-special token universe: 30 atom tokens, branch and ring
    /// operators, and the 16 index tokens.
    pub fn universe() -> Vec<Token> {
        let mut out = Vec::new();
        for &element in &ELEMENTS {
            for prefix in [BondPrefix::Single, BondPrefix::Double, BondPrefix::Triple] {
                out.push(Token::Atom { element, prefix });
            }
        }
        out.push(Token::Branch1);
        out.push(Token::Branch2);
        for prefix in [BondPrefix::Single, BondPrefix::Double, BondPrefix::Triple] {
            out.push(Token::Ring1(prefix));
            out.push(Token::Ring2(prefix));
        }
        for v in 1..=16 {
            out.push(Token::Index(v));
        }
        out
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Start => write!(f, "<s>"),
            Token::End => write!(f, "</s>"),
            Token::Mask => write!(f, "[MASK]"),
            Token::Pad => write!(f, "<pad>"),
            Token::Atom { element, prefix } => {
                write!(f, "[{}{}]", prefix.glyph(), element.symbol())
            }
            Token::Branch1 => write!(f, "[Branch1]"),
            Token::Branch2 => write!(f, "[Branch2]"),
            Token::Ring1(p) => write!(f, "[{}Ring1]", p.glyph()),
            Token::Ring2(p) => write!(f, "[{}Ring2]", p.glyph()),
            Token::Index(v) => write!(f, "[{v}]"),
        }
    }
}

/// An ordered token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSeq(pub Vec<Token>);

impl TokenSeq {
    pub fn new(tokens: Vec<Token>) -> TokenSeq {
        TokenSeq(tokens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn to_text(&self) -> String {
        detokenize(self)
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl FromIterator<Token> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().collect())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("cannot build an alphabet from an empty corpus")]
    EmptyCorpus,
    #[error("unrecognized token text {span:?} at offset {offset}")]
    UnknownToken { span: String, offset: usize },
    #[error("unbracketed characters {span:?} at offset {offset}")]
    Unbracketed { span: String, offset: usize },
    #[error("mutation count {count} exceeds sequence length {len}")]
    MutationCount { count: usize, len: usize },
    #[error("alphabet file malformed: {0}")]
    AlphabetFile(String),
}

/// Ordered, duplicate-free vocabulary: the four specials first, then every
/// distinct corpus token in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<Token>,
    index: HashMap<Token, usize>,
}

impl Alphabet {
    /// Build from a corpus of token sequences. Deterministic given corpus
    /// order; errors on an empty corpus.
    pub fn build<'a, I>(corpus: I) -> Result<Alphabet, LangError>
    where
        I: IntoIterator<Item = &'a TokenSeq>,
    {
        let mut tokens: Vec<Token> = SPECIALS.to_vec();
        let mut index: HashMap<Token, usize> =
            SPECIALS.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut any = false;
        for seq in corpus {
            any = true;
            for &t in seq.tokens() {
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(t) {
                    slot.insert(tokens.len());
                    tokens.push(t);
                }
            }
        }
        if !any {
            return Err(LangError::EmptyCorpus);
        }
        Ok(Alphabet { tokens, index })
    }

    /// The alphabet covering the entire supported token universe.
    pub fn full() -> Alphabet {
        let mut tokens: Vec<Token> = SPECIALS.to_vec();
        tokens.extend(Token::universe());
        let index = tokens.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Alphabet { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn id_of(&self, t: Token) -> Option<usize> {
        self.index.get(&t).copied()
    }

    pub fn token(&self, id: usize) -> Token {
        self.tokens[id]
    }

    /// Non-special tokens (the decodable alphabet).
    pub fn non_special(&self) -> Vec<Token> {
        self.tokens
            .iter()
            .copied()
            .filter(|t| !t.is_special())
            .collect()
    }

    pub fn encode_ids(&self, seq: &TokenSeq) -> Option<Vec<usize>> {
        seq.tokens().iter().map(|&t| self.id_of(t)).collect()
    }

    /// Serialize as a JSON array of token strings, specials first.
    pub fn to_json(&self) -> String {
        let strings: Vec<String> = self.tokens.iter().map(|t| t.to_string()).collect();
        serde_json::to_string_pretty(&strings).expect("string array serializes")
    }

    pub fn from_json(s: &str) -> Result<Alphabet, LangError> {
        let strings: Vec<String> =
            serde_json::from_str(s).map_err(|e| LangError::AlphabetFile(e.to_string()))?;
        let mut tokens = Vec::with_capacity(strings.len());
        for t in &strings {
            tokens.push(
                Token::from_text(t)
                    .ok_or_else(|| LangError::AlphabetFile(format!("unknown token {t:?}")))?,
            );
        }
        if tokens.len() < SPECIALS.len() || tokens[..4] != SPECIALS {
            return Err(LangError::AlphabetFile(
                "specials <s>, </s>, [MASK], <pad> must come first".into(),
            ));
        }
        let mut index = HashMap::new();
        for (i, &t) in tokens.iter().enumerate() {
            if index.insert(t, i).is_some() {
                return Err(LangError::AlphabetFile(format!("duplicate token {t}")));
            }
        }
        Ok(Alphabet { tokens, index })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_alphabet_from_two_molecules() {
        let a = tokenize_selfies("[C][C]").unwrap();
        let b = tokenize_selfies("[C][O]").unwrap();
        let alpha = Alphabet::build([&a, &b]).unwrap();
        assert_eq!(alpha.len(), 6);
        assert_eq!(alpha.token(0), Token::Start);
        assert_eq!(alpha.token(1), Token::End);
        assert_eq!(alpha.token(2), Token::Mask);
        assert_eq!(alpha.token(3), Token::Pad);
        assert_eq!(alpha.token(4), Token::atom(Element::C));
        assert_eq!(alpha.token(5), Token::atom(Element::O));
    }

    #[test]
    fn duplicate_only_corpus_dedups() {
        let a = tokenize_selfies("[C]").unwrap();
        let b = tokenize_selfies("[C]").unwrap();
        let alpha = Alphabet::build([&a, &b]).unwrap();
        assert_eq!(alpha.len(), 5);
    }

    #[test]
    fn empty_corpus_errors() {
        assert_eq!(
            Alphabet::build(std::iter::empty::<&TokenSeq>()).unwrap_err(),
            LangError::EmptyCorpus
        );
    }

    #[test]
    fn token_text_roundtrip() {
        for t in Token::universe().into_iter().chain(SPECIALS) {
            assert_eq!(Token::from_text(&t.to_string()), Some(t), "{t}");
        }
    }

    #[test]
    fn universe_size() {
        // 10 elements x 3 prefixes + 2 branch + 6 ring + 16 index
        assert_eq!(Token::universe().len(), 54);
    }

    #[test]
    fn alphabet_json_roundtrip() {
        let alpha = Alphabet::full();
        let back = Alphabet::from_json(&alpha.to_json()).unwrap();
        assert_eq!(alpha, back);
    }

    #[test]
    fn alphabet_json_requires_specials_first() {
        assert!(Alphabet::from_json(r#"["[C]", "<s>", "</s>", "[MASK]", "<pad>"]"#).is_err());
    }
}
