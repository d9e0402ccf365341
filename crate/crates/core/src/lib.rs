//! molforge: a self-contained molecular generation toolkit.
//!
//! The crate is organized around a small set of subsystems:
//!
//! - [`graph`] — valence-aware molecular graphs, ring perception, canonical keys
//! - [`lang`] — SELFIES and SMILES codecs plus the mutation-robustness harness
//! - [`descriptors`] — fingerprints, similarity, scaffolds, logP, SA, p-logP, QED
//! - [`nn`] — a minimal dense tensor type and reverse-mode tape autodiff
//! - [`model`] — prefix-augmented encoder-decoder sequence model
//! - [`train`] — masked-reconstruction pretraining, rank-loss feedback tuning,
//!   constrained optimization
//! - [`metrics`] — distribution-learning evaluation and substructure attention
//! - [`corpus`] — molecule file ingestion and alphabet persistence

pub mod graph;
pub mod corpus;
pub mod descriptors;
pub mod lang;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod train;
