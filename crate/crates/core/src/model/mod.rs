//! Compact encoder-decoder sequence model with prefix-augmented multi-head
//! attention, sampling, sequence log-probabilities, attention extraction and
//! exact gradients.

pub mod attention;
pub mod checkpoint;
mod config;
mod params;
mod sample;
pub(crate) mod transformer;

pub use checkpoint::CheckpointMeta;
pub use config::{ConfigError, ModelConfig, PrefixSites};
pub use params::{
    AttnP, BoundParams, DecLayerP, EncLayerP, FfnP, NormP, ParamTree, Parameters, PrefixBankP,
    PrefixPairP,
};
pub use sample::{
    gradients, ids_with_specials, sample, sample_index, sequence_log_prob, sequence_log_prob_var,
    strip_candidate, GradientSet, SamplerConfig,
};
pub use transformer::{
    attention_map, build_decoder, build_encoder, decode_step, encode_source, forward,
    AttentionMap, AttnRecord, ForwardRun, ForwardTrace, ModelError,
};
