//! Batched LSTM forward and backward passes over one truncated segment.
//!
//! Activations of a segment are stored time-major: row `t·B + b` holds
//! timestep `t` of batch column `b`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Axis};
use rand::Rng as _;

use super::{LayerParams, Params};
use crate::corpus::TokenId;
use crate::rng::Rng;

/// Per-layer `(h, c)`, each `B × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub h: Vec<Array2<f64>>,
    pub c: Vec<Array2<f64>>,
}

impl State {
    pub fn zeros(params: &Params, batch: usize) -> Self {
        let dims = params.layers.iter().map(|l| l.out_dim());
        Self {
            h: dims.clone().map(|o| Array2::zeros((batch, o))).collect(),
            c: dims.map(|o| Array2::zeros((batch, o))).collect(),
        }
    }

    pub fn batch(&self) -> usize {
        self.h.first().map_or(0, |h| h.nrows())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct LayerCache {
    x: Array2<f64>,
    /// Activated gates `[i | f | g | o]`.
    gates: Array2<f64>,
    tanh_c: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
}

/// Runs one layer over all timesteps; returns the stacked outputs and, when
/// `keep` is set, what the backward pass needs.
fn layer_forward(
    p: &LayerParams,
    x: Array2<f64>,
    h: &mut Array2<f64>,
    c: &mut Array2<f64>,
    batch: usize,
    keep: bool,
) -> (Array2<f64>, Option<LayerCache>) {
    let o = p.out_dim();
    let rows = x.nrows();
    let steps = rows / batch;
    let mut z = x.dot(&p.wx);
    z += &p.b;
    let mut out = Array2::zeros((rows, o));
    let (mut tanh_all, mut h_prev, mut c_prev) = if keep {
        (Array2::zeros((rows, o)), Array2::zeros((rows, o)), Array2::zeros((rows, o)))
    } else {
        (Array2::zeros((0, o)), Array2::zeros((0, o)), Array2::zeros((0, o)))
    };

    for t in 0..steps {
        let span = t * batch..(t + 1) * batch;
        let mut zt = z.slice_mut(s![span.clone(), ..]);
        general_mat_mul(1.0, &*h, &p.wh, 1.0, &mut zt);
        if keep {
            h_prev.slice_mut(s![span.clone(), ..]).assign(h);
            c_prev.slice_mut(s![span.clone(), ..]).assign(c);
        }
        for r in 0..batch {
            let row = t * batch + r;
            let mut zr = zt.row_mut(r);
            let zr = zr.as_slice_mut().expect("standard layout");
            let hr = h.row_mut(r).into_slice().expect("standard layout");
            let cr = c.row_mut(r).into_slice().expect("standard layout");
            for j in 0..o {
                let i = sigmoid(zr[j]);
                let f = sigmoid(zr[o + j]);
                let g = zr[2 * o + j].tanh();
                let og = sigmoid(zr[3 * o + j]);
                zr[j] = i;
                zr[o + j] = f;
                zr[2 * o + j] = g;
                zr[3 * o + j] = og;
                let cn = f * cr[j] + i * g;
                let tc = cn.tanh();
                cr[j] = cn;
                hr[j] = og * tc;
                out[[row, j]] = hr[j];
                if keep {
                    tanh_all[[row, j]] = tc;
                }
            }
        }
    }
    let cache = keep.then_some(LayerCache {
        x,
        gates: z,
        tanh_c: tanh_all,
        h_prev,
        c_prev,
    });
    (out, cache)
}

/// Backpropagates `dh` (gradient w.r.t. every output of the layer) through
/// the segment. Gradients reaching the initial state are dropped.
fn layer_backward(p: &LayerParams, cache: &LayerCache, dh: &Array2<f64>, grad: &mut LayerParams, batch: usize) -> Array2<f64> {
    let o = p.out_dim();
    let rows = dh.nrows();
    let steps = rows / batch;
    let mut dz = Array2::zeros((rows, 4 * o));
    let mut dh_next = Array2::<f64>::zeros((batch, o));
    let mut dc_next = Array2::<f64>::zeros((batch, o));

    for t in (0..steps).rev() {
        for r in 0..batch {
            let row = t * batch + r;
            let gates = cache.gates.row(row);
            let gates = gates.as_slice().expect("standard layout");
            let mut dzr = dz.row_mut(row);
            let dzr = dzr.as_slice_mut().expect("standard layout");
            for j in 0..o {
                let (i, f, g, og) = (gates[j], gates[o + j], gates[2 * o + j], gates[3 * o + j]);
                let tc = cache.tanh_c[[row, j]];
                let d = dh[[row, j]] + dh_next[[r, j]];
                let dog = d * tc;
                let dc = d * og * (1.0 - tc * tc) + dc_next[[r, j]];
                dc_next[[r, j]] = dc * f;
                dzr[j] = dc * g * i * (1.0 - i);
                dzr[o + j] = dc * cache.c_prev[[row, j]] * f * (1.0 - f);
                dzr[2 * o + j] = dc * i * (1.0 - g * g);
                dzr[3 * o + j] = dog * og * (1.0 - og);
            }
        }
        if t > 0 {
            let dzt = dz.slice(s![t * batch..(t + 1) * batch, ..]);
            general_mat_mul(1.0, &dzt, &p.wh.t(), 0.0, &mut dh_next);
        }
    }
    general_mat_mul(1.0, &cache.x.t(), &dz, 1.0, &mut grad.wx);
    general_mat_mul(1.0, &cache.h_prev.t(), &dz, 1.0, &mut grad.wh);
    grad.b += &dz.sum_axis(Axis(0));
    dz.dot(&p.wx.t())
}

fn embed(params: &Params, tokens: &[TokenId]) -> Array2<f64> {
    let d = params.embed_dim();
    let mut x = Array2::zeros((tokens.len(), d));
    for (r, &tok) in tokens.iter().enumerate() {
        x.row_mut(r).assign(&params.emb_in.row(tok as usize));
    }
    x
}

/// Inverted-dropout mask, or `None` when dropout is off.
fn mask(shape: (usize, usize), p: f64, rng: &mut Option<&mut Rng>) -> Option<Array2<f64>> {
    let rng = rng.as_mut()?;
    if p == 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    Some(Array2::from_shape_simple_fn(shape, || if rng.random::<f64>() < p { 0.0 } else { keep }))
}

/// Decoder logits for every position of the segment, advancing `state`.
pub fn forward_logits(params: &Params, tokens: &[TokenId], state: &mut State) -> Array2<f64> {
    let batch = state.batch();
    let mut x = embed(params, tokens);
    for (l, p) in params.layers.iter().enumerate() {
        let (out, _) = layer_forward(p, x, &mut state.h[l], &mut state.c[l], batch, false);
        x = out;
    }
    let mut logits = x.dot(&params.decoder().t());
    logits += &params.b_out;
    logits
}

/// Result of one forward/backward pass.
#[derive(Debug, Clone)]
pub struct SegmentGrad {
    /// Mean cross-entropy over the segment's predictions.
    pub ce: f64,
    pub grads: Params,
    pub predictions: usize,
}

/// Cross-entropy of predicting `targets` from `inputs` (both time-major,
/// `T·B` long) and its gradient, advancing `state` to the segment end.
/// `dropout` supplies the drop probability and the mask stream.
pub fn forward_backward(
    params: &Params,
    inputs: &[TokenId],
    targets: &[TokenId],
    state: &mut State,
    dropout: f64,
    mut rng: Option<&mut Rng>,
) -> SegmentGrad {
    assert_eq!(inputs.len(), targets.len());
    let batch = state.batch();
    let rows = inputs.len();
    let n_layers = params.layers.len();

    let mut caches = Vec::with_capacity(n_layers);
    let mut masks = Vec::with_capacity(n_layers + 1);
    let mut x = embed(params, inputs);
    for (l, p) in params.layers.iter().enumerate() {
        let m = mask(x.dim(), dropout, &mut rng);
        if let Some(m) = &m {
            x *= m;
        }
        masks.push(m);
        let (out, cache) = layer_forward(p, x, &mut state.h[l], &mut state.c[l], batch, true);
        caches.push(cache.expect("kept"));
        x = out;
    }
    let out_mask = mask(x.dim(), dropout, &mut rng);
    if let Some(m) = &out_mask {
        x *= m;
    }

    let decoder = params.decoder();
    let mut dlogits = x.dot(&decoder.t());
    dlogits += &params.b_out;
    let scale = 1.0 / rows as f64;
    let mut ce = 0.0;
    for (r, &target) in targets.iter().enumerate() {
        let mut row = dlogits.row_mut(r);
        let row = row.as_slice_mut().expect("standard layout");
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        let target = target as usize;
        ce -= (row[target] / sum).ln();
        for v in row.iter_mut() {
            *v *= scale / sum;
        }
        row[target] -= scale;
    }
    ce *= scale;

    let mut grads = params.zeros_like();
    {
        let dec_grad = grads.emb_out.as_mut().unwrap_or(&mut grads.emb_in);
        general_mat_mul(1.0, &dlogits.t(), &x, 1.0, dec_grad);
    }
    grads.b_out += &dlogits.sum_axis(Axis(0));
    let mut dh = dlogits.dot(decoder);
    if let Some(m) = &out_mask {
        dh *= m;
    }
    for l in (0..n_layers).rev() {
        let mut dx = layer_backward(&params.layers[l], &caches[l], &dh, &mut grads.layers[l], batch);
        if let Some(m) = &masks[l] {
            dx *= m;
        }
        dh = dx;
    }
    for (r, &tok) in inputs.iter().enumerate() {
        let mut g = grads.emb_in.row_mut(tok as usize);
        g += &dh.row(r);
    }
    SegmentGrad {
        ce,
        grads,
        predictions: rows,
    }
}

/// log-softmax of one logit row.
pub fn log_softmax(row: &[f64]) -> Array1<f64> {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    row.iter().map(|v| v - lse).collect()
}
