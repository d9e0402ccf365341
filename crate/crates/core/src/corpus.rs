//! Molecule corpus files: UTF-8 text, one molecule per line. Lines starting
//! with `[` parse as SELFIES, anything else as SMILES; blank lines and `#`
//! comments are skipped.

use crate::graph::{validate, MolecularGraph};
use crate::lang::{
    decode_selfies, encode_selfies, parse_smiles, tokenize_selfies, TokenSeq,
};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("corpus {0} contains no usable molecules")]
    Empty(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineFormat {
    Smiles,
    Selfies,
}

/// One successfully ingested molecule.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub line_number: usize,
    pub format: LineFormat,
    /// The raw line as it appeared in the file.
    pub text: String,
    pub graph: MolecularGraph,
    /// SELFIES token sequence (translated from SMILES lines).
    pub tokens: TokenSeq,
}

/// A loaded corpus with per-line error bookkeeping.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub path: String,
    pub entries: Vec<CorpusEntry>,
    /// (line number, message) for lines that failed to parse or encode.
    pub skipped: Vec<(usize, String)>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn token_seqs(&self) -> Vec<TokenSeq> {
        self.entries.iter().map(|e| e.tokens.clone()).collect()
    }

    pub fn graphs(&self) -> Vec<MolecularGraph> {
        self.entries.iter().map(|e| e.graph.clone()).collect()
    }

    /// Dominant line format: mixed corpora report `None`.
    pub fn uniform_format(&self) -> Option<LineFormat> {
        let mut it = self.entries.iter().map(|e| e.format);
        let first = it.next()?;
        it.all(|f| f == first).then_some(first)
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let corpus = parse_corpus_text(&text, &path.display().to_string());
    if corpus.entries.is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    Ok(corpus)
}

pub fn parse_corpus_text(text: &str, path: &str) -> Corpus {
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_number = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let outcome = if line.starts_with('[') {
            ingest_selfies(line)
        } else {
            ingest_smiles(line)
        };
        match outcome {
            Ok((format, graph, tokens)) => entries.push(CorpusEntry {
                line_number,
                format,
                text: line.to_string(),
                graph,
                tokens,
            }),
            Err(msg) => skipped.push((line_number, msg)),
        }
    }
    Corpus {
        path: path.to_string(),
        entries,
        skipped,
    }
}

fn ingest_selfies(line: &str) -> Result<(LineFormat, MolecularGraph, TokenSeq), String> {
    let tokens = tokenize_selfies(line).map_err(|e| e.to_string())?;
    if tokens.is_empty() {
        return Err("empty SELFIES line".into());
    }
    let graph = decode_selfies(&tokens);
    Ok((LineFormat::Selfies, graph, tokens))
}

fn ingest_smiles(line: &str) -> Result<(LineFormat, MolecularGraph, TokenSeq), String> {
    let graph = parse_smiles(line).map_err(|e| e.to_string())?;
    if !validate(&graph).valid {
        return Err("valence-invalid molecule".into());
    }
    if !graph.is_connected() {
        return Err("multi-fragment molecule".into());
    }
    let tokens = encode_selfies(&graph).map_err(|e| e.to_string())?;
    Ok((LineFormat::Smiles, graph, tokens))
}
