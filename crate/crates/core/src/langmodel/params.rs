use ndarray::{Array1, Array2};
use rand::Rng as _;

use super::LmConfig;
use crate::rng::Rng;

/// One LSTM layer. Gate blocks are laid out `[input | forget | cell | output]`
/// along the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// in × 4·out
    pub wx: Array2<f64>,
    /// out × 4·out
    pub wh: Array2<f64>,
    /// 4·out
    pub b: Array1<f64>,
}

impl LayerParams {
    pub fn out_dim(&self) -> usize {
        self.wh.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.wx.nrows()
    }
}

/// Every trainable tensor of the model. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// V × d
    pub emb_in: Array2<f64>,
    pub layers: Vec<LayerParams>,
    /// V × d; `None` when the decoder shares `emb_in`.
    pub emb_out: Option<Array2<f64>>,
    /// V
    pub b_out: Array1<f64>,
}

fn uniform(rng: &mut Rng, shape: (usize, usize), bound: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || rng.random_range(-bound..=bound))
}

impl Params {
    /// LSTM weights and biases uniform in ±1/√hidden, embeddings uniform in
    /// ±0.1, decoder bias zero.
    pub fn init(config: &LmConfig, vocab_size: usize, rng: &mut Rng) -> Self {
        let d = config.embed_dim;
        let bound = 1.0 / (config.hidden as f64).sqrt();
        let emb_in = uniform(rng, (vocab_size, d), 0.1);
        let layers = (0..config.layers)
            .map(|l| {
                let (i, o) = config.layer_dims(l);
                LayerParams {
                    wx: uniform(rng, (i, 4 * o), bound),
                    wh: uniform(rng, (o, 4 * o), bound),
                    b: Array1::from_shape_simple_fn(4 * o, || rng.random_range(-bound..=bound)),
                }
            })
            .collect();
        let emb_out = (!config.tie_weights).then(|| uniform(rng, (vocab_size, d), 0.1));
        Self {
            emb_in,
            layers,
            emb_out,
            b_out: Array1::zeros(vocab_size),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            emb_in: Array2::zeros(self.emb_in.raw_dim()),
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    wx: Array2::zeros(l.wx.raw_dim()),
                    wh: Array2::zeros(l.wh.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
            emb_out: self.emb_out.as_ref().map(|e| Array2::zeros(e.raw_dim())),
            b_out: Array1::zeros(self.b_out.raw_dim()),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.emb_in.nrows()
    }

    pub fn embed_dim(&self) -> usize {
        self.emb_in.ncols()
    }

    pub fn decoder(&self) -> &Array2<f64> {
        self.emb_out.as_ref().unwrap_or(&self.emb_in)
    }

    /// Tensor names and shapes in storage order.
    pub fn manifest(&self) -> Vec<(String, Vec<usize>)> {
        self.tensors().into_iter().map(|(n, s, _)| (n, s)).collect()
    }

    /// `(name, shape, data)` in a fixed order.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = vec![(
            "emb_in".to_owned(),
            self.emb_in.shape().to_vec(),
            self.emb_in.as_slice().expect("standard layout"),
        )];
        for (l, p) in self.layers.iter().enumerate() {
            out.push((format!("layer{l}.wx"), p.wx.shape().to_vec(), p.wx.as_slice().expect("standard layout")));
            out.push((format!("layer{l}.wh"), p.wh.shape().to_vec(), p.wh.as_slice().expect("standard layout")));
            out.push((format!("layer{l}.b"), p.b.shape().to_vec(), p.b.as_slice().expect("standard layout")));
        }
        if let Some(e) = &self.emb_out {
            out.push(("emb_out".to_owned(), e.shape().to_vec(), e.as_slice().expect("standard layout")));
        }
        out.push(("b_out".to_owned(), self.b_out.shape().to_vec(), self.b_out.as_slice().expect("standard layout")));
        out
    }

    /// Mutable data of every tensor, in the order of [`Params::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self.emb_in.as_slice_mut().expect("standard layout")];
        for p in &mut self.layers {
            out.push(p.wx.as_slice_mut().expect("standard layout"));
            out.push(p.wh.as_slice_mut().expect("standard layout"));
            out.push(p.b.as_slice_mut().expect("standard layout"));
        }
        if let Some(e) = &mut self.emb_out {
            out.push(e.as_slice_mut().expect("standard layout"));
        }
        out.push(self.b_out.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|t| t.2.len()).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.2.iter()).map(|x| x * x).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.2.iter().all(|x| x.is_finite()))
    }

    /// `self += alpha · other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Params) {
        for (dst, (_, _, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += alpha * b;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            for x in t {
                *x *= alpha;
            }
        }
    }
}
