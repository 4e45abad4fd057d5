//! Gender subspace of an embedding matrix and the soft-debias regularizer.
//!
//! The difference vectors of the defining pairs are stacked into C; the top
//! right singular vectors of C span the gender subspace B. Training adds
//! λ‖NB‖²_F, where N holds every embedding row except defining words and
//! special tokens. B is recomputed from the current embeddings but treated
//! as constant when differentiating, so the gradient is 2λ·N·B·Bᵀ.

mod embedding;
mod svd;

use std::path::Path;

use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::{DefiningSets, TokenId, Vocabulary};
use crate::error::{Error, Result};

pub use embedding::{EmbeddingMatrix, EmbeddingRole};
pub use svd::{jacobi_svd, Svd};

/// Relative slack on the captured-variance comparison so that a spectrum
/// meeting the threshold exactly is not lost to rounding.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Row i is (u_i − v_i)/2 for the i-th defining pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMatrix {
    pub c_matrix: Array2<f64>,
    /// `(male_id, female_id)` per row.
    pub pair_ids: Vec<(TokenId, TokenId)>,
}

impl DifferenceMatrix {
    pub fn from_rows(emb: ArrayView2<f64>, pair_ids: &[(TokenId, TokenId)]) -> Result<Self> {
        if pair_ids.is_empty() {
            return Err(Error::Config("no defining pairs to build the difference matrix".into()));
        }
        let (v, d) = emb.dim();
        let mut c = Array2::zeros((pair_ids.len(), d));
        for (i, &(u, w)) in pair_ids.iter().enumerate() {
            for id in [u, w] {
                if id as usize >= v {
                    return Err(Error::DimensionMismatch {
                        expected: v,
                        got: id as usize + 1,
                    });
                }
            }
            let (a, b) = (emb.row(u as usize), emb.row(w as usize));
            for j in 0..d {
                c[[i, j]] = (a[j] - b[j]) / 2.0;
            }
        }
        Ok(Self {
            c_matrix: c,
            pair_ids: pair_ids.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.pair_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pair_ids.is_empty()
    }
}

pub fn build_difference_matrix(
    emb: &EmbeddingMatrix,
    sets: &DefiningSets,
    vocab: &Vocabulary,
) -> Result<DifferenceMatrix> {
    if emb.vocab_size() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            got: emb.vocab_size(),
        });
    }
    DifferenceMatrix::from_rows(emb.rows.view(), &sets.id_pairs(vocab))
}

/// The top-k right singular directions of C.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderSubspace {
    /// d×k, orthonormal columns.
    pub basis: Array2<f64>,
    /// All min(n, d) singular values of C, descending.
    pub singular_values: Vec<f64>,
    pub k: usize,
    /// Σ_{i≤k} σ_i² / Σ_i σ_i²
    pub captured_variance: f64,
}

/// SVD of C; keeps the fewest leading directions whose squared singular
/// values reach `threshold` of the total. Each basis vector is signed so its
/// largest-magnitude entry is positive.
pub fn gender_subspace(diff: &DifferenceMatrix, threshold: f64) -> Result<GenderSubspace> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance threshold must be in (0, 1], got {threshold}"
        )));
    }
    let c = &diff.c_matrix;
    let (n, d) = c.dim();
    if c.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateSubspace);
    }
    // singular vectors of C in R^d are the left ones of Cᵀ, which has only
    // n columns to rotate
    let svd = jacobi_svd(c.t());
    let r = n.min(d);
    let singular_values: Vec<f64> = svd.s.iter().take(r).copied().collect();
    let energy: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
    let total: f64 = energy.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateSubspace);
    }
    let target = threshold * total * (1.0 - THRESHOLD_SLACK);
    let mut k = r;
    let mut acc = 0.0;
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc >= target {
            k = i + 1;
            break;
        }
    }
    let captured: f64 = energy[..k].iter().sum::<f64>() / total;

    let mut basis = Array2::zeros((d, k));
    for j in 0..k {
        let mut col = svd.u.column(j).to_owned();
        let mut best = 0;
        for i in 1..d {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        basis.column_mut(j).assign(&col);
    }
    Ok(GenderSubspace {
        basis,
        singular_values,
        k,
        captured_variance: captured,
    })
}

#[derive(Serialize, Deserialize)]
struct SubspaceDump {
    k: usize,
    captured_variance: f64,
    singular_values: Vec<f64>,
    /// d×k, row-major
    basis: Vec<Vec<f64>>,
}

impl GenderSubspace {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn to_json(&self) -> String {
        let dump = SubspaceDump {
            k: self.k,
            captured_variance: self.captured_variance,
            singular_values: self.singular_values.clone(),
            basis: self.basis.rows().into_iter().map(|r| r.to_vec()).collect(),
        };
        serde_json::to_string_pretty(&dump).expect("subspace serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dump: SubspaceDump = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        let d = dump.basis.len();
        let flat: Vec<f64> = dump.basis.into_iter().flatten().collect();
        if flat.len() != d * dump.k {
            return Err(Error::parse(path, "basis is not a d×k array"));
        }
        Ok(Self {
            basis: Array2::from_shape_vec((d, dump.k), flat).expect("shape checked"),
            singular_values: dump.singular_values,
            k: dump.k,
            captured_variance: dump.captured_variance,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegTarget {
    #[default]
    Input,
    Output,
    Both,
}

impl RegTarget {
    pub fn includes(self, role: EmbeddingRole) -> bool {
        matches!(
            (self, role),
            (RegTarget::Both, _) | (RegTarget::Input, EmbeddingRole::Input) | (RegTarget::Output, EmbeddingRole::Output)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizerConfig {
    pub lambda: f64,
    pub target: RegTarget,
    pub variance_threshold: f64,
    /// Recompute C and B every optimizer step; otherwise once per epoch.
    pub refresh: bool,
    /// When off, training skips the regularizer entirely; λ = 0 with this on
    /// still runs the full path and adds a zero gradient.
    pub enabled: bool,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            target: RegTarget::Input,
            variance_threshold: 0.5,
            refresh: true,
            enabled: true,
        }
    }
}

impl RegularizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be finite and ≥ 0, got {}", self.lambda)));
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "variance_threshold must be in (0, 1], got {}",
                self.variance_threshold
            )));
        }
        Ok(())
    }
}

fn check_dim(n: ArrayView2<f64>, space: &GenderSubspace) -> Result<()> {
    if n.ncols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: n.ncols(),
        });
    }
    Ok(())
}

/// λ‖NB‖²_F
pub fn regularizer_value(n: ArrayView2<f64>, space: &GenderSubspace, lambda: f64) -> Result<f64> {
    check_dim(n, space)?;
    let nb = n.dot(&space.basis);
    Ok(lambda * nb.iter().map(|x| x * x).sum::<f64>())
}

/// 2λ·N·B·Bᵀ, the gradient of [`regularizer_value`] with B held fixed.
pub fn regularizer_gradient(n: ArrayView2<f64>, space: &GenderSubspace, lambda: f64) -> Result<Array2<f64>> {
    check_dim(n, space)?;
    let nb = n.dot(&space.basis);
    Ok(nb.dot(&space.basis.t()) * (2.0 * lambda))
}

/// `true` for the rows that make up N: not a defining word, not a special
/// token.
pub fn n_mask(vocab: &Vocabulary, sets: &DefiningSets) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..vocab.len()).map(|i| !vocab.is_special(i as TokenId)).collect();
    for id in sets.member_ids(vocab) {
        mask[id as usize] = false;
    }
    mask
}

/// [`regularizer_value`] over the rows of `emb` selected by `mask`.
pub fn masked_regularizer_value(
    emb: ArrayView2<f64>,
    mask: &[bool],
    space: &GenderSubspace,
    lambda: f64,
) -> Result<f64> {
    check_dim(emb, space)?;
    if mask.len() != emb.nrows() {
        return Err(Error::DimensionMismatch {
            expected: emb.nrows(),
            got: mask.len(),
        });
    }
    let nb = emb.dot(&space.basis);
    let sum: f64 = nb
        .axis_iter(Axis(0))
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(r, _)| r.iter().map(|x| x * x).sum::<f64>())
        .sum();
    Ok(lambda * sum)
}

/// Adds 2λ·N·B·Bᵀ into the masked rows of `grad`; other rows are untouched.
/// Returns the regularizer value at `emb`.
pub fn add_masked_gradient(
    emb: ArrayView2<f64>,
    mask: &[bool],
    space: &GenderSubspace,
    lambda: f64,
    mut grad: ArrayViewMut2<f64>,
) -> Result<f64> {
    check_dim(emb, space)?;
    if mask.len() != emb.nrows() || grad.dim() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.nrows(),
            got: mask.len().min(grad.nrows()),
        });
    }
    let nb = emb.dot(&space.basis);
    let g = nb.dot(&space.basis.t());
    let mut value = 0.0;
    for (i, &m) in mask.iter().enumerate() {
        if m {
            value += nb.row(i).iter().map(|x| x * x).sum::<f64>();
            grad.row_mut(i).scaled_add(2.0 * lambda, &g.row(i));
        }
    }
    Ok(lambda * value)
}

/// Removes the subspace component from every row except the defining words.
pub fn hard_debias(
    emb: &EmbeddingMatrix,
    space: &GenderSubspace,
    sets: &DefiningSets,
    vocab: &Vocabulary,
) -> Result<EmbeddingMatrix> {
    check_dim(emb.rows.view(), space)?;
    let mut keep = vec![false; emb.vocab_size()];
    for id in sets.member_ids(vocab) {
        if let Some(k) = keep.get_mut(id as usize) {
            *k = true;
        }
    }
    let proj = emb.rows.dot(&space.basis).dot(&space.basis.t());
    let mut rows = emb.rows.clone();
    for (i, &k) in keep.iter().enumerate() {
        if !k {
            let mut r = rows.row_mut(i);
            r -= &proj.row(i);
        }
    }
    Ok(EmbeddingMatrix { rows, role: emb.role })
}
