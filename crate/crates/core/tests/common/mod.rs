//! Test-only oracles, independent of the library's counting and training code.
#![allow(dead_code)]

use std::collections::BTreeMap;

use biaslab::biasmeter::ContextScheme;
use biaslab::corpus::{DefiningSets, Gender, StopWordList, EOS, UNK};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quadratic enumeration of every (target, gendered) position pair.
/// Returns word → (c_wf, c_wm) plus (cf, cm, total_targets).
pub fn brute_force_counts(
    tokens: &[String],
    sets: &DefiningSets,
    stops: &StopWordList,
    scheme: ContextScheme,
) -> (BTreeMap<String, (f64, f64)>, (u64, u64, u64)) {
    let is_target = |t: &str| {
        !sets.is_gendered(t) && !stops.contains(t) && t != EOS && t != UNK
    };
    let weight = |d: usize| -> f64 {
        match scheme {
            ContextScheme::Fixed { k } => {
                if d <= k {
                    1.0
                } else {
                    0.0
                }
            }
            ContextScheme::Exponential { adjacent_weight, decay } => {
                let w = adjacent_weight * decay.powf((d - 1) as f64);
                if w >= 1e-9 {
                    w
                } else {
                    0.0
                }
            }
        }
    };
    let mut cells: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let (mut cf, mut cm, mut total) = (0, 0, 0);
    for t in tokens {
        match sets.gender_of(t) {
            Some(Gender::Female) => cf += 1,
            Some(Gender::Male) => cm += 1,
            None => {}
        }
    }
    for (i, w) in tokens.iter().enumerate() {
        if !is_target(w) {
            continue;
        }
        total += 1;
        let cell = cells.entry(w.clone()).or_insert((0.0, 0.0));
        for (j, g) in tokens.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = i.abs_diff(j);
            match sets.gender_of(g) {
                Some(Gender::Female) => cell.0 += weight(d),
                Some(Gender::Male) => cell.1 += weight(d),
                None => {}
            }
        }
    }
    (cells, (cf, cm, total))
}

/// Random small corpus over at most 20 symbols, always containing both
/// pronouns so the defining pair survives filtering.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    const SYMBOLS: [&str; 20] = [
        "he", "she", "him", "her", ".", EOS, "w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8",
        "w9", "w10", "w11", "w12", "w13",
    ];
    let len = rng.random_range(2..=max_len);
    let alphabet = rng.random_range(6..=SYMBOLS.len());
    let mut out: Vec<String> = (0..len)
        .map(|_| SYMBOLS[rng.random_range(0..alphabet)].to_owned())
        .collect();
    out[0] = "he".into();
    let last = out.len() - 1;
    out[last] = "she".into();
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PAIRS_JSON: &str = r#"[["he","she"],["him","her"]]"#;

/// Central finite difference of `f` at `x` along coordinate `i`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &mut [f64], i: usize, h: f64) -> f64 {
    let orig = x[i];
    x[i] = orig + h;
    let up = f(x);
    x[i] = orig - h;
    let down = f(x);
    x[i] = orig;
    (up - down) / (2.0 * h)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Fourth-order central difference of `f` at `x` along coordinate `i`.
pub fn five_point(f: &mut dyn FnMut(&[f64]) -> f64, x: &mut [f64], i: usize, h: f64) -> f64 {
    let orig = x[i];
    let mut at = |d: f64| {
        x[i] = orig + d;
        f(x)
    };
    let v = -at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h);
    x[i] = orig;
    v / (12.0 * h)
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), or the absolute difference when both vanish.
pub fn normwise_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
