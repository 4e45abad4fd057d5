use ndarray::{Array1, Array2, ArrayView2};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U · diag(s) · Vᵀ` of an m×p matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m×p; columns belonging to zero singular values are zero.
    pub u: Array2<f64>,
    /// Descending, non-negative.
    pub s: Array1<f64>,
    /// p×p orthogonal.
    pub v: Array2<f64>,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Plane rotations applied from the right orthogonalize the columns of `A`;
/// the column norms are then the singular values. Work per sweep is
/// O(p² m), so pass the orientation with fewer columns.
pub fn jacobi_svd(a: ArrayView2<f64>) -> Svd {
    let (m, p) = a.dim();
    let mut w = a.to_owned();
    let mut v = Array2::<f64>::eye(p);
    let eps = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..p {
            for l in (j + 1)..p {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (w[[i, j]], w[[i, l]]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[[i, j]], w[[i, l]]);
                    w[[i, j]] = c * x - s * y;
                    w[[i, l]] = s * x + c * y;
                }
                for i in 0..p {
                    let (x, y) = (v[[i, j]], v[[i, l]]);
                    v[[i, j]] = c * x - s * y;
                    v[[i, l]] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let scale = norms.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let mut u = Array2::zeros((m, p));
    let mut vs = Array2::zeros((p, p));
    let mut s = Array1::zeros(p);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s[dst] = sigma;
        vs.column_mut(dst).assign(&v.column(src));
        if sigma > scale * eps * (m.max(p) as f64) {
            u.column_mut(dst).assign(&(&w.column(src) / sigma));
        }
    }
    Svd { u, s, v: vs }
}
