use serde::{Deserialize, Serialize};

use super::BiasScoreTable;
use crate::error::{Error, Result};

/// Points with an absolute externally studentized residual above this are
/// dropped before the final fit.
pub const OUTLIER_CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Slope of generated-text scores regressed on training-corpus scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationFit {
    pub beta: f64,
    pub intercept: f64,
    pub n_used: usize,
    pub n_outliers: usize,
    pub r_squared: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Err(Error::DegenerateRegressor);
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sse += (yi - slope * xi - intercept).powi(2);
        sst += (yi - my).powi(2);
    }
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Externally studentized residuals of `fit` on `(x, y)`.
///
/// Residuals at rounding level are treated as exact zeros so noise-free
/// data never produces spurious outliers.
pub fn studentized_residuals(x: &[f64], y: &[f64], fit: &LineFit) -> Vec<f64> {
    let n = x.len();
    if n < 4 {
        return vec![0.0; n];
    }
    let mx = mean(x);
    let sxx: f64 = x.iter().map(|&xi| (xi - mx).powi(2)).sum();
    let resid: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| yi - fit.slope * xi - fit.intercept)
        .collect();
    let sse: f64 = resid.iter().map(|e| e * e).sum();
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-10 * y_scale;
    resid
        .iter()
        .zip(x)
        .map(|(&e, &xi)| {
            let h = 1.0 / n as f64 + (xi - mx).powi(2) / sxx;
            if h >= 1.0 || e.abs() <= floor * 1e-3 {
                return 0.0;
            }
            let s2 = ((sse - e * e / (1.0 - h)) / (n - 3) as f64).max(0.0);
            e / (s2.sqrt().max(floor) * (1.0 - h).sqrt())
        })
        .collect()
}

/// OLS, then one pass dropping points whose |studentized residual| exceeds
/// [`OUTLIER_CUTOFF`], then a single refit.
pub fn fit_with_outlier_removal(x: &[f64], y: &[f64]) -> Result<AmplificationFit> {
    if x.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: x.len(),
        });
    }
    let first = ols(x, y)?;
    let t = studentized_residuals(x, y, &first);
    let keep: Vec<usize> = (0..x.len()).filter(|&i| !(t[i].abs() > OUTLIER_CUTOFF)).collect();
    if keep.len() < x.len() && keep.len() >= 3 {
        let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
        if let Ok(second) = ols(&xs, &ys) {
            return Ok(AmplificationFit {
                beta: second.slope,
                intercept: second.intercept,
                n_used: keep.len(),
                n_outliers: x.len() - keep.len(),
                r_squared: second.r_squared,
            });
        }
    }
    Ok(AmplificationFit {
        beta: first.slope,
        intercept: first.intercept,
        n_used: x.len(),
        n_outliers: 0,
        r_squared: first.r_squared,
    })
}

/// Regresses generated-text scores on training scores over the words scored
/// in both tables: bias_gen(w) = β · bias_train(w) + c.
pub fn fit_amplification(train: &BiasScoreTable, generated: &BiasScoreTable) -> Result<AmplificationFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = train
        .scores
        .iter()
        .filter_map(|(w, s)| generated.score(w).map(|g| (s.score, g)))
        .unzip();
    fit_with_outlier_removal(&x, &y)
}
