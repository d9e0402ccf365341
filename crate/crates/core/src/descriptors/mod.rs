//! Molecular scoring: fingerprints and similarity, scaffolds and fragments,
//! logP, synthetic accessibility, penalized logP and QED.

mod aromatic;
mod fingerprint;
mod logp;
mod plogp;
mod qed;
mod sa;
mod scaffold;
mod substructure;

pub use aromatic::{perceive_aromaticity, Aromaticity};
pub use fingerprint::{
    atom_environments, morgan_default, morgan_fingerprint, tanimoto, Fingerprint,
    FingerprintError, DEFAULT_NBITS, DEFAULT_RADIUS,
};
pub use logp::{logp, logp_detailed, LogpReport};
pub use plogp::{
    penalized_logp, penalized_logp_raw, ring_penalty, CorpusStats, MeanStd, StatsError,
};
pub use qed::{
    alert_count, aromatic_ring_count, hba_count, hbd_count, polar_surface_area, qed,
    qed_descriptors, qed_from_descriptors, rotatable_bonds, AdsParams, QedDescriptors,
};
pub use sa::{sa_score, FragmentTable, SaError};
pub use scaffold::{fragments, scaffold, scaffold_key, FragmentMultiset};
pub use substructure::{contains, Pattern};

use crate::graph::{validate, MolecularGraph};
use std::sync::Arc;

/// Which property drives candidate scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    PenalizedLogp,
    Qed,
}

impl PropertyKind {
    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::PenalizedLogp => "plogp",
            PropertyKind::Qed => "qed",
        }
    }

    pub fn parse(s: &str) -> Option<PropertyKind> {
        match s {
            "plogp" => Some(PropertyKind::PenalizedLogp),
            "qed" => Some(PropertyKind::Qed),
            _ => None,
        }
    }
}

/// A named, total scoring function over valid connected molecules.
///
/// Molecules failing validity or connectivity score negative infinity, so
/// they can never win a candidate comparison.
#[derive(Clone)]
pub struct PropertyFunction {
    pub kind: PropertyKind,
    table: Option<Arc<FragmentTable>>,
    stats: Option<CorpusStats>,
}

impl PropertyFunction {
    pub fn penalized_logp(table: Arc<FragmentTable>, stats: CorpusStats) -> PropertyFunction {
        PropertyFunction {
            kind: PropertyKind::PenalizedLogp,
            table: Some(table),
            stats: Some(stats),
        }
    }

    pub fn qed() -> PropertyFunction {
        PropertyFunction {
            kind: PropertyKind::Qed,
            table: None,
            stats: None,
        }
    }

    pub fn score(&self, g: &MolecularGraph) -> f64 {
        if !validate(g).valid || !g.is_connected() {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            PropertyKind::PenalizedLogp => penalized_logp(
                g,
                self.table.as_ref().expect("plogp carries its table"),
                self.stats.as_ref().expect("plogp carries its stats"),
            ),
            PropertyKind::Qed => qed(g),
        }
    }
}

impl std::fmt::Debug for PropertyFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PropertyFunction")
            .field("kind", &self.kind)
            .finish()
    }
}
