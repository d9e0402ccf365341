//! Training objectives and loops: masked-reconstruction pretraining, the
//! mixed-domain prefix stage, chemical-feedback fine-tuning and constrained
//! optimization.

mod candidates;
mod constrained;
mod corrupt;
mod feedback;
mod generate;
mod loss;
mod optimizer;
mod pretrain;

pub use candidates::{generate_candidates, Candidate, CandidateSet};
pub use constrained::{
    constrained_optimize, OptimizeConfig, OptimizeOutcome, OptimizedMolecule,
};
pub use corrupt::{corrupt, mask_all, CorruptError};
pub use generate::generate_set;
pub use feedback::{
    feedback_finetune, CandidateRefresh, CeTarget, FeedbackConfig, FeedbackReport,
};
pub use loss::{
    ce_loss_value, combined_loss, combined_loss_var, rank_loss, rank_loss_from, rank_loss_var,
    SmoothedTarget,
};
pub use optimizer::{mean_gradients, Adam, AdamConfig};
pub use pretrain::{length_histogram, prefix_stage, pretrain, PretrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus has no usable molecules")]
    EmptyCorpus,
    #[error("token sequence {0:?} contains tokens outside the alphabet")]
    Vocabulary(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Corrupt(#[from] CorruptError),
    #[error("training diverged; parameters restored to epoch {last_epoch}")]
    Diverged { last_epoch: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}
