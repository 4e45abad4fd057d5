//! Binary checkpoint: magic, format version, a length-prefixed JSON header
//! (config, vocabulary, tensor manifest), then every tensor as
//! little-endian f32 in manifest order.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{LanguageModel, LayerParams, LmConfig, Params};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BIASLMCK";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: LmConfig,
    vocab_size: usize,
    vocab: Vocabulary,
    tensors: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

pub fn save(model: &LanguageModel, vocab: &Vocabulary, path: &Path) -> Result<()> {
    let header = Header {
        config: model.config.clone(),
        vocab_size: vocab.len(),
        vocab: vocab.clone(),
        tensors: model
            .params
            .manifest()
            .into_iter()
            .map(|(name, shape)| TensorEntry { name, shape })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut buf = Vec::with_capacity(json.len() + 4 * model.params.num_values() + 24);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for (_, _, data) in model.params.tensors() {
        for &x in data {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(LanguageModel, Vocabulary)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::parse(path, m);
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("not a model checkpoint"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(&format!("unsupported checkpoint version {version}")));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let json = bytes.get(20..20 + len).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(json).map_err(|e| Error::parse(path, e))?;
    let vocab = header.vocab.rebuild_index();
    if vocab.len() != header.vocab_size {
        return Err(bad("vocabulary size disagrees with header"));
    }

    let mut values = bytes[20 + len..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64);
    let mut take = |entry: &TensorEntry, shape: &[usize]| -> Result<Vec<f64>> {
        if entry.shape != shape {
            return Err(bad(&format!("tensor {} has shape {:?}, expected {shape:?}", entry.name, entry.shape)));
        }
        let n: usize = shape.iter().product();
        let data: Vec<f64> = values.by_ref().take(n).collect();
        if data.len() != n {
            return Err(bad("truncated tensor data"));
        }
        Ok(data)
    };

    let config = header.config;
    let v = header.vocab_size;
    let d = config.embed_dim;
    let mut entries = header.tensors.iter();
    let mut next = || entries.next().ok_or_else(|| bad("tensor manifest too short"));
    let emb_in = Array2::from_shape_vec((v, d), take(next()?, &[v, d])?).expect("shape checked");
    let mut layers = Vec::with_capacity(config.layers);
    for l in 0..config.layers {
        let (i, o) = config.layer_dims(l);
        let wx = take(next()?, &[i, 4 * o])?;
        let wh = take(next()?, &[o, 4 * o])?;
        let b = take(next()?, &[4 * o])?;
        layers.push(LayerParams {
            wx: Array2::from_shape_vec((i, 4 * o), wx).expect("shape checked"),
            wh: Array2::from_shape_vec((o, 4 * o), wh).expect("shape checked"),
            b: Array1::from(b),
        });
    }
    let emb_out = if config.tie_weights {
        None
    } else {
        Some(Array2::from_shape_vec((v, d), take(next()?, &[v, d])?).expect("shape checked"))
    };
    let b_out = Array1::from(take(next()?, &[v])?);
    if values.next().is_some() {
        return Err(bad("trailing data after the last tensor"));
    }
    let params = Params {
        emb_in,
        layers,
        emb_out,
        b_out,
    };
    if !params.all_finite() {
        return Err(bad("non-finite parameter"));
    }
    Ok((LanguageModel { config, params }, vocab))
}
