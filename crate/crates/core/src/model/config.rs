//! Model hyperparameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which attention sites receive prefix key/value rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixSites {
    pub enc_self: bool,
    pub dec_self: bool,
    pub cross: bool,
}

impl Default for PrefixSites {
    fn default() -> Self {
        PrefixSites {
            enc_self: true,
            dec_self: true,
            cross: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Vocabulary size N.
    pub vocab: usize,
    /// Embedding width d.
    pub d: usize,
    pub heads: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub ffn: usize,
    /// Prefix length m; zero disables prefixes everywhere.
    pub prefix_len: usize,
    /// Longest token sequence (including start/end specials).
    pub max_len: usize,
    #[serde(default)]
    pub prefix_sites: PrefixSites,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("embedding width {0} not divisible by head count {1}")]
    HeadSplit(usize, usize),
    #[error("{0} must be at least 1")]
    ZeroDim(&'static str),
}

impl ModelConfig {
    /// Desk-scale defaults for a given vocabulary.
    pub fn compact(vocab: usize) -> ModelConfig {
        ModelConfig {
            vocab,
            d: 64,
            heads: 4,
            enc_layers: 2,
            dec_layers: 2,
            ffn: 256,
            prefix_len: 5,
            max_len: 160,
            prefix_sites: PrefixSites::default(),
        }
    }

    /// A tiny configuration for gradient and identity tests.
    pub fn toy(vocab: usize) -> ModelConfig {
        ModelConfig {
            vocab,
            d: 8,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ffn: 16,
            prefix_len: 2,
            max_len: 16,
            prefix_sites: PrefixSites::default(),
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d / self.heads
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.d.is_multiple_of(self.heads) {
            return Err(ConfigError::HeadSplit(self.d, self.heads));
        }
        for (name, v) in [
            ("vocab", self.vocab),
            ("d", self.d),
            ("heads", self.heads),
            ("enc_layers", self.enc_layers),
            ("dec_layers", self.dec_layers),
            ("ffn", self.ffn),
            ("max_len", self.max_len),
        ] {
            if v == 0 {
                return Err(ConfigError::ZeroDim(name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(ModelConfig::compact(54).validate().is_ok());
        assert!(ModelConfig::toy(8).validate().is_ok());
    }

    #[test]
    fn bad_head_split_rejected() {
        let mut c = ModelConfig::compact(10);
        c.heads = 5;
        assert_eq!(c.validate().unwrap_err(), ConfigError::HeadSplit(64, 5));
    }
}
