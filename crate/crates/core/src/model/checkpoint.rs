//! Checkpoint persistence.
//!
//! Layout: magic bytes `MGFK`, a little-endian u32 format version, a
//! little-endian u32 header length, a JSON header (config, metadata, tensor
//! manifest with name/shape/offset), then the little-endian f32 payloads in
//! manifest order. Reading and rewriting a checkpoint reproduces it
//! byte-for-byte.

use super::config::ModelConfig;
use super::params::{ParamTree, Parameters};
use super::transformer::ModelError;
use crate::nn::Tensor;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"MGFK";
pub const VERSION: u32 = 1;

/// Training-side artifacts a checkpoint carries beyond the weights.
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct CheckpointMeta {
    /// Alphabet token strings, specials first.
    pub alphabet: Vec<String>,
    /// Histogram of training-corpus content lengths as (length, count).
    pub length_hist: Vec<(u32, u64)>,
    /// Which stage produced this checkpoint.
    pub stage: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    rows: usize,
    cols: usize,
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    meta: CheckpointMeta,
    manifest: Vec<ManifestEntry>,
}

pub fn save(
    params: &Parameters<f32>,
    meta: &CheckpointMeta,
    path: &Path,
) -> Result<(), ModelError> {
    let bytes = to_bytes(params, meta);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    std::fs::rename(&tmp, path).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    Ok(())
}

pub fn to_bytes(params: &Parameters<f32>, meta: &CheckpointMeta) -> Vec<u8> {
    let mut manifest = Vec::new();
    let mut offset = 0u64;
    params.tree.visit(&mut |name, t| {
        manifest.push(ManifestEntry {
            name,
            rows: t.rows(),
            cols: t.cols(),
            offset,
        });
        offset += (t.len() * 4) as u64;
    });
    let header = Header {
        config: params.config.clone(),
        meta: meta.clone(),
        manifest,
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + header_json.len() + offset as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    params.tree.visit(&mut |_, t| {
        for &v in t.data() {
            out.write_all(&v.to_le_bytes()).expect("vec write");
        }
    });
    out
}

pub fn load(path: &Path) -> Result<(Parameters<f32>, CheckpointMeta), ModelError> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    from_bytes(&bytes)
}

pub fn from_bytes(bytes: &[u8]) -> Result<(Parameters<f32>, CheckpointMeta), ModelError> {
    let err = |m: &str| ModelError::Checkpoint(m.to_string());
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(err("not a MGFK checkpoint"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(ModelError::Checkpoint(format!(
            "checkpoint version {version} unsupported (expected {VERSION})"
        )));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if bytes.len() < 12 + header_len {
        return Err(err("truncated header"));
    }
    let header: Header = serde_json::from_slice(&bytes[12..12 + header_len])
        .map_err(|e| ModelError::Checkpoint(format!("bad header: {e}")))?;
    header
        .config
        .validate()
        .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    let payload = &bytes[12 + header_len..];

    // build a zero-shaped tree from the config, then fill from the manifest
    let mut proto: Parameters<f32> = Parameters::init(
        header.config.clone(),
        &mut rand::SeedableRng::seed_from_u64(0),
    );
    let mut by_name: std::collections::HashMap<String, Tensor<f32>> = std::collections::HashMap::new();
    for entry in &header.manifest {
        let n = entry.rows * entry.cols;
        let start = entry.offset as usize;
        let end = start + n * 4;
        if end > payload.len() {
            return Err(err("truncated payload"));
        }
        let data: Vec<f32> = payload[start..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        by_name.insert(entry.name.clone(), Tensor::from_vec(entry.rows, entry.cols, data));
    }
    let mut missing = Vec::new();
    {
        let mut names = Vec::new();
        proto.tree.visit(&mut |name, t| names.push((name, t.shape())));
        for (name, shape) in names {
            match by_name.get(&name) {
                None => missing.push(name),
                Some(t) if t.shape() != shape => {
                    return Err(ModelError::Checkpoint(format!(
                        "tensor {name} has shape {:?}, expected {:?}",
                        t.shape(),
                        shape
                    )));
                }
                Some(_) => {}
            }
        }
    }
    if !missing.is_empty() {
        return Err(ModelError::Checkpoint(format!(
            "missing tensors: {missing:?}"
        )));
    }
    let filled: ParamTree<Tensor<f32>> = {
        let mut order = Vec::new();
        proto.tree.visit(&mut |name, _| order.push(name));
        let mut iter = order.into_iter();
        proto.tree.map(&mut |_| {
            let name = iter.next().expect("orders align");
            by_name[&name].clone()
        })
    };
    proto.tree = filled;
    Ok((proto, header.meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_checkpoint() -> (Parameters<f32>, CheckpointMeta) {
        let params = Parameters::init(
            ModelConfig::toy(8),
            &mut ChaCha8Rng::seed_from_u64(11),
        );
        let meta = CheckpointMeta {
            alphabet: vec!["<s>".into(), "</s>".into(), "[MASK]".into(), "<pad>".into()],
            length_hist: vec![(3, 10), (4, 2)],
            stage: "pretrain".into(),
        };
        (params, meta)
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let (params, meta) = sample_checkpoint();
        let bytes = to_bytes(&params, &meta);
        let (loaded, meta2) = from_bytes(&bytes).unwrap();
        assert_eq!(meta, meta2);
        let rewritten = to_bytes(&loaded, &meta2);
        assert_eq!(bytes, rewritten);
    }

    #[test]
    fn values_survive() {
        let (params, meta) = sample_checkpoint();
        let (loaded, _) = from_bytes(&to_bytes(&params, &meta)).unwrap();
        for ((na, ta), (nb, tb)) in params.tree.flat().iter().zip(&loaded.tree.flat()) {
            assert_eq!(na, nb);
            assert_eq!(ta.data(), tb.data());
        }
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let (params, meta) = sample_checkpoint();
        let mut bytes = to_bytes(&params, &meta);
        assert!(from_bytes(&bytes[..8]).is_err());
        bytes[0] = b'X';
        assert!(from_bytes(&bytes).is_err());
        let mut versioned = to_bytes(&params, &meta);
        versioned[4] = 9;
        let err = from_bytes(&versioned).unwrap_err();
        assert!(matches!(err, ModelError::Checkpoint(m) if m.contains("version")));
    }

    #[test]
    fn file_roundtrip() {
        let (params, meta) = sample_checkpoint();
        let dir = std::env::temp_dir().join("molforge-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("toy.mgfk");
        save(&params, &meta, &path).unwrap();
        let (loaded, meta2) = load(&path).unwrap();
        assert_eq!(meta, meta2);
        assert_eq!(params.total_len(), loaded.total_len());
        std::fs::remove_file(&path).ok();
    }
}
