//! Acceptance gate. Each test checks one criterion at its stated tolerance
//! and prints a single `criterion N: PASS|FAIL ...` line. Tests take a
//! shared lock so that runtimes are measured one at a time.
//!
//! Criteria 1 to 3 need the real corpora under `$BIASLAB_DATA_DIR` (default
//! `<workspace>/data`): `ptb/ptb.train.txt` and
//! `wikitext-2/wiki.train.tokens`.

mod common;

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use biaslab::biasmeter::{
    bias_scores, count_cooccurrences, fit_with_outlier_removal, ols, summarize, BiasSummary, ContextScheme,
};
use biaslab::corpus::synthetic::SyntheticSpec;
use biaslab::corpus::{self, CorpusKind, DefiningSets, StopWordList, TokenId, Vocabulary};
use biaslab::genderspace::{
    gender_subspace, hard_debias, n_mask, regularizer_gradient, regularizer_value, DifferenceMatrix,
    EmbeddingMatrix, EmbeddingRole, RegTarget,
};
use biaslab::langmodel::lstm::{forward_backward, State};
use biaslab::langmodel::{GenerationConfig, LanguageModel, LmConfig, Penalty};
use biaslab::pipeline::{CorpusConfig, Experiment, ExperimentConfig};
use ndarray::{Array1, Array2};
use rand::Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(n: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status} {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn data_dir() -> PathBuf {
    std::env::var_os("BIASLAB_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Train-corpus summary of a real corpus, or a failing verdict naming the
/// missing file.
fn corpus_summary(n: u32, rel: &str, kind: CorpusKind, scheme: ContextScheme) -> Option<(BiasSummary, Duration)> {
    let path = data_dir().join(rel);
    if !path.exists() {
        verdict(n, false, &format!("corpus not found at {} (set BIASLAB_DATA_DIR)", path.display()));
        return None;
    }
    let start = Instant::now();
    let tokens = corpus::read_tokens(&path, kind).unwrap();
    let vocab = Vocabulary::build(&tokens).unwrap();
    let stream = vocab.encode(&tokens, kind).unwrap();
    let sets = DefiningSets::builtin(kind, &vocab).unwrap();
    let stops = StopWordList::builtin(kind).excluding(&sets);
    let table = count_cooccurrences(&stream, &vocab, &sets, &stops, scheme).unwrap();
    let summary = summarize(&bias_scores(&table, kind.label()).unwrap()).unwrap();
    Some((summary, start.elapsed()))
}

#[test]
fn criterion_1_ptb_fixed_window_summary() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((s, t)) = corpus_summary(1, "ptb/ptb.train.txt", CorpusKind::Ptb, ContextScheme::fixed()) {
        let pass = within(s.mu, 0.83, 0.08) && within(s.sigma, 1.00, 0.10) && t.as_secs_f64() < 60.0;
        verdict(1, pass, &format!("PTB fixed k=10: mu {:.4} (0.83±0.08) sigma {:.4} (1.00±0.10) n {} in {t:.1?}", s.mu, s.sigma, s.n));
    }
}

#[test]
fn criterion_2_wikitext2_fixed_window_summary() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let found = corpus_summary(2, "wikitext-2/wiki.train.tokens", CorpusKind::WikiText2, ContextScheme::fixed());
    if let Some((s, t)) = found {
        let pass = within(s.mu, 0.80, 0.08) && within(s.sigma, 1.00, 0.10) && t.as_secs_f64() < 180.0;
        verdict(2, pass, &format!("WikiText-2 fixed k=10: mu {:.4} (0.80±0.08) sigma {:.4} (1.00±0.10) n {} in {t:.1?}", s.mu, s.sigma, s.n));
    }
}

#[test]
fn criterion_3_ptb_infinite_context_summary() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((s, t)) = corpus_summary(3, "ptb/ptb.train.txt", CorpusKind::Ptb, ContextScheme::exponential()) {
        let pass = within(s.mu, 3.81, 0.4) && within(s.sigma, 4.65, 0.5);
        verdict(3, pass, &format!("PTB infinite context: mu {:.4} (3.81±0.4) sigma {:.4} (4.65±0.5) n {} in {t:.1?}", s.mu, s.sigma, s.n));
    }
}

#[test]
fn criterion_4_counting_oracle() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = common::rng(404);
    let mut fixed_mismatches = 0;
    let mut worst_exp: f64 = 0.0;
    for case in 0..500 {
        let tokens = common::random_corpus(&mut rng, 200);
        let vocab = Vocabulary::build(&tokens).unwrap();
        let sets = DefiningSets::from_pairs(DefiningSets::parse_pairs(common::PAIRS_JSON).unwrap(), &vocab).unwrap();
        let stops = StopWordList::from_tokens(["."]);
        let stream = vocab.encode(&tokens, CorpusKind::Custom).unwrap();
        let k = 1 + case % 15;
        for scheme in [ContextScheme::Fixed { k }, ContextScheme::exponential()] {
            let table = count_cooccurrences(&stream, &vocab, &sets, &stops, scheme).unwrap();
            let (cells, _) = common::brute_force_counts(&tokens, &sets, &stops, scheme);
            for (word, (f, m)) in &cells {
                let got = table.get(word);
                match scheme {
                    ContextScheme::Fixed { .. } => {
                        if got.c_wf != *f || got.c_wm != *m {
                            fixed_mismatches += 1;
                        }
                    }
                    ContextScheme::Exponential { .. } => {
                        worst_exp = worst_exp
                            .max(common::relative_error(got.c_wf, *f))
                            .max(common::relative_error(got.c_wm, *m));
                    }
                }
            }
        }
    }
    let t = start.elapsed();
    let pass = fixed_mismatches == 0 && worst_exp <= 1e-9 && t.as_secs_f64() < 30.0;
    verdict(
        4,
        pass,
        &format!("500 corpora: fixed mismatches {fixed_mismatches}, worst exponential rel. error {worst_exp:.2e} (≤1e-9) in {t:.1?}"),
    );
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

fn difference(c: Array2<f64>) -> DifferenceMatrix {
    let n = c.nrows() as TokenId;
    DifferenceMatrix {
        c_matrix: c,
        pair_ids: (0..n).map(|i| (2 * i, 2 * i + 1)).collect(),
    }
}

/// Worst normwise relative error of the regularizer gradient over 100
/// random instances.
fn regularizer_gradient_error() -> f64 {
    let mut rng = common::rng(505);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (rows, d) = (rng.random_range(1..15), rng.random_range(2..12));
        let lambda = rng.random_range(0.001..10.0);
        let pairs = rng.random_range(1..8);
        let space = gender_subspace(&difference(random_matrix(&mut rng, pairs, d)), 0.5).unwrap();
        let n = random_matrix(&mut rng, rows, d);
        let analytic = regularizer_gradient(n.view(), &space, lambda).unwrap();
        let mut x = n.into_raw_vec_and_offset().0;
        let mut f = |x: &[f64]| regularizer_value(ndarray::ArrayView2::from_shape((rows, d), x).unwrap(), &space, lambda).unwrap();
        let mut err = 0.0;
        for (i, a) in analytic.iter().enumerate() {
            err += (a - common::five_point(&mut f, &mut x, i, 1e-4)).powi(2);
        }
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(err.sqrt() / scale);
    }
    worst
}

/// Worst per-tensor normwise relative error of the full tiny-model loss gradient
/// (cross-entropy plus the frozen-B penalty) over 100 random instances.
fn model_gradient_error() -> f64 {
    let vocab = Vocabulary::build(&["he", "she", "him", "her", "a", "b"]).unwrap();
    assert_eq!(vocab.len(), 8);
    let sets = DefiningSets::from_pairs(DefiningSets::parse_pairs(common::PAIRS_JSON).unwrap(), &vocab).unwrap();
    let mut rng = common::rng(506);
    let mut worst: f64 = 0.0;
    for instance in 0..100u64 {
        let mut config = LmConfig {
            layers: 3,
            hidden: 4,
            embed_dim: 4,
            bptt_len: 3,
            batch_size: 2,
            tie_weights: instance % 4 == 3,
            seed: instance,
            ..LmConfig::desk_scale()
        };
        config.reg.target = [RegTarget::Input, RegTarget::Output, RegTarget::Both][instance as usize % 3];
        config.reg.lambda = rng.random_range(0.0..2.0);
        let mut model = LanguageModel::new(config, 8).unwrap();
        model.params.scale(rng.random_range(1.0..4.0));
        let inputs: Vec<TokenId> = (0..6).map(|_| rng.random_range(0..8)).collect();
        let targets: Vec<TokenId> = (0..6).map(|_| rng.random_range(0..8)).collect();
        let penalty = Penalty::new(&model, &vocab, &sets);
        let spaces = penalty.subspaces(&model.params).unwrap();

        let loss = |p: &biaslab::langmodel::Params| {
            let mut state = State::zeros(p, 2);
            let ce = forward_backward(p, &inputs, &targets, &mut state, 0.0, None).ce;
            let mut scratch = p.zeros_like();
            ce + penalty.apply(p, &spaces, &mut scratch).unwrap()
        };
        let mut state = State::zeros(&model.params, 2);
        let mut out = forward_backward(&model.params, &inputs, &targets, &mut state, 0.0, None);
        penalty.apply(&model.params, &spaces, &mut out.grads).unwrap();
        let analytic: Vec<Vec<f64>> = out.grads.tensors().iter().map(|t| t.2.to_vec()).collect();
        let mut p = model.params.clone();
        for (ti, grad) in analytic.iter().enumerate() {
            let mut x = p.tensors_mut()[ti].to_vec();
            let numeric: Vec<f64> = (0..grad.len())
                .map(|j| {
                    let mut f = |v: &[f64]| {
                        p.tensors_mut()[ti].copy_from_slice(v);
                        loss(&p)
                    };
                    common::five_point(&mut f, &mut x, j, 1e-4)
                })
                .collect();
            p.tensors_mut()[ti].copy_from_slice(&x);
            worst = worst.max(common::normwise_error(grad, &numeric));
        }
    }
    worst
}

#[test]
fn criterion_5_gradient_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let reg = regularizer_gradient_error();
    let full = model_gradient_error();
    let t = start.elapsed();
    let pass = reg < 1e-5 && full < 1e-4 && t.as_secs_f64() < 60.0;
    verdict(
        5,
        pass,
        &format!("worst rel. error: regularizer {reg:.2e} (<1e-5), full model {full:.2e} (<1e-4), 100 instances each, in {t:.1?}"),
    );
}

/// C with prescribed singular values: U·diag(s)·Vᵀ for random orthonormal
/// U (n×r) and V (d×r), built by Gram-Schmidt.
fn with_spectrum(rng: &mut impl Rng, s: &[f64], n: usize, d: usize) -> Array2<f64> {
    let ortho = |rng: &mut dyn rand::RngCore, rows: usize| {
        let mut cols: Vec<Array1<f64>> = Vec::new();
        while cols.len() < s.len() {
            let mut v = Array1::from_shape_fn(rows, |_| rng.random_range(-1.0..1.0));
            for c in &cols {
                let dot = v.dot(c);
                v.scaled_add(-dot, c);
            }
            let norm = v.dot(&v).sqrt();
            if norm > 1e-3 {
                cols.push(v / norm);
            }
        }
        cols
    };
    let u = ortho(rng, n);
    let v = ortho(rng, d);
    let mut c = Array2::zeros((n, d));
    for (i, &si) in s.iter().enumerate() {
        for a in 0..n {
            for b in 0..d {
                c[[a, b]] += si * u[i][a] * v[i][b];
            }
        }
    }
    c
}

#[test]
fn criterion_6_subspace_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = common::rng(606);

    let mut worst_ortho: f64 = 0.0;
    for _ in 0..50 {
        let (n, d) = (rng.random_range(1..20), rng.random_range(2..40));
        let space = gender_subspace(&difference(random_matrix(&mut rng, n, d)), rng.random_range(0.05..1.0)).unwrap();
        let gram = space.basis.t().dot(&space.basis);
        for ((i, j), g) in gram.indexed_iter() {
            worst_ortho = worst_ortho.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }

    // spectrum, threshold, minimal k under the σ² energy rule
    let spectra: [(&[f64], f64, usize); 6] = [
        (&[3.0, 1.0], 0.5, 1),
        (&[1.0, 1.0], 0.5, 1),
        (&[1.0, 1.0, 1.0, 1.0], 0.5, 2),
        (&[4.0, 3.0, 3.0], 0.7, 2),
        (&[2.0, 2.0, 1.0], 0.9, 3),
        (&[5.0, 0.5, 0.1], 0.99, 2),
    ];
    let mut k_failures = Vec::new();
    for (s, threshold, expected) in spectra {
        let c = with_spectrum(&mut rng, s, 8, 12);
        let space = gender_subspace(&difference(c), threshold).unwrap();
        if space.k != expected {
            k_failures.push(format!("{s:?}@{threshold}: k {} != {expected}", space.k));
        }
    }

    let mut worst_debias: f64 = 0.0;
    for _ in 0..20 {
        let pairs = DefiningSets::parse_pairs(DefiningSets::builtin_json(CorpusKind::Ptb)).unwrap();
        let mut words: Vec<String> = pairs.iter().flat_map(|p| [p.male.clone(), p.female.clone()]).collect();
        words.extend((0..60).map(|i| format!("w{i}")));
        let vocab = Vocabulary::build(&words).unwrap();
        let sets = DefiningSets::from_pairs(pairs, &vocab).unwrap();
        let emb = EmbeddingMatrix::new(random_matrix(&mut rng, vocab.len(), 24), EmbeddingRole::Input).unwrap();
        let c = biaslab::genderspace::build_difference_matrix(&emb, &sets, &vocab).unwrap();
        let space = gender_subspace(&c, 0.5).unwrap();
        let out = hard_debias(&emb, &space, &sets, &vocab).unwrap();
        let mask = n_mask(&vocab, &sets);
        let rows: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let n_after = out.rows.select(ndarray::Axis(0), &rows);
        let n_before = emb.rows.select(ndarray::Axis(0), &rows);
        let lambda = rng.random_range(0.1..10.0);
        let norm: f64 = n_before.iter().map(|x| x * x).sum();
        worst_debias = worst_debias.max(regularizer_value(n_after.view(), &space, lambda).unwrap() / (lambda * norm));
    }
    let t = start.elapsed();
    let pass = worst_ortho <= 1e-10 && k_failures.is_empty() && worst_debias < 1e-10 && t.as_secs_f64() < 10.0;
    verdict(
        6,
        pass,
        &format!(
            "|BᵀB−I| max {worst_ortho:.1e} (≤1e-10); minimal-k failures {k_failures:?}; post-debias reg/(λ‖N‖²) max {worst_debias:.1e} (<1e-10); in {t:.1?}"
        ),
    );
}

/// Closed-form simple linear regression, written out independently.
fn reference_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

#[test]
fn criterion_7_regression_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = common::rng(707);
    let (mut worst_clean, mut worst_outlier): (f64, f64) = (0.0, 0.0);
    let mut wrong_removals = 0;
    // y = 0.4x + 0.1 on a grid with one gross outlier
    let x: Vec<f64> = (0..30).map(|i| i as f64 / 10.0 - 1.5).collect();
    let mut y: Vec<f64> = x.iter().map(|v| 0.4 * v + 0.1).collect();
    y[7] += 25.0;
    let fit = fit_with_outlier_removal(&x, &y).unwrap();
    if fit.n_outliers != 1 {
        wrong_removals += 1;
    }
    worst_outlier = worst_outlier.max((fit.beta - 0.4).abs());
    // below ~15 points a gross outlier can swamp clean points past the cutoff
    for _ in 0..200 {
        let n = rng.random_range(20..60);
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let mut y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let fit = ols(&x, &y).unwrap();
        worst_clean = worst_clean.max((fit.slope - a).abs()).max((fit.intercept - b).abs());

        let bad = rng.random_range(0..n);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        y[bad] += sign * rng.random_range(20.0..100.0);
        let fit = fit_with_outlier_removal(&x, &y).unwrap();
        if fit.n_outliers != 1 {
            wrong_removals += 1;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| i != bad).collect();
        let (cx, cy): (Vec<f64>, Vec<f64>) = keep.iter().map(|&i| (x[i], y[i])).unzip();
        let (slope, _) = reference_line(&cx, &cy);
        worst_outlier = worst_outlier.max((fit.beta - slope).abs()).max((fit.beta - a).abs());
    }
    let pass = worst_clean <= 1e-9 && wrong_removals == 0 && worst_outlier <= 1e-6;
    verdict(
        7,
        pass,
        &format!(
            "y=0.4x+0.1 and 200 random lines of 20 to 59 points: noise-free max error {worst_clean:.1e} (≤1e-9); outlier runs removing ≠1 point {wrong_removals}; clean slope error {worst_outlier:.1e} (≤1e-6)"
        ),
    );
}

/// Desk-scale sweep settings.
const SWEEP_EPOCHS: usize = 40;
const SWEEP_LAMBDAS: [f64; 3] = [0.0, 0.1, 0.5];
const SWEEP_SEEDS: [u64; 3] = [0, 1, 2];

fn synthetic_config(out_dir: &Path, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        corpus: CorpusConfig {
            synthetic: Some(SyntheticSpec::default()),
            ..Default::default()
        },
        schemes: vec![ContextScheme::fixed()],
        lambdas: SWEEP_LAMBDAS.to_vec(),
        defining_sets: None,
        stop_words: None,
        model: LmConfig {
            epochs: SWEEP_EPOCHS,
            ..LmConfig::desk_scale()
        },
        generation: GenerationConfig::desk_scale(),
        out_dir: out_dir.to_path_buf(),
        seed,
    }
}

/// KL(generated ‖ train) between unigram distributions, with add-one
/// smoothing on the training side, and the generated mass on tokens absent
/// from training.
fn unigram_kl(generated: &[TokenId], train_counts: &[u64]) -> (f64, f64) {
    let mut g = vec![0.0; train_counts.len()];
    for &id in generated {
        g[id as usize] += 1.0;
    }
    let gn = generated.len() as f64;
    let tn = train_counts.iter().sum::<u64>() as f64 + train_counts.len() as f64;
    let kl = g
        .iter()
        .zip(train_counts)
        .filter(|(c, _)| **c > 0.0)
        .map(|(c, &t)| {
            let p = c / gn;
            p * (p / ((t + 1) as f64 / tn)).ln()
        })
        .sum();
    let unseen = g.iter().zip(train_counts).filter(|(_, &t)| t == 0).map(|(c, _)| c / gn).sum();
    (kl, unseen)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn criterion_8_lambda_sweep_trend() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let l = SWEEP_LAMBDAS.len();
    let (mut reg, mut mu, mut ppl) = (vec![vec![]; l], vec![vec![]; l], vec![vec![]; l]);
    let (mut worst_kl, mut worst_unseen): (f64, f64) = (0.0, 0.0);
    let mut tokens_in_corpus = 0;
    for seed in SWEEP_SEEDS {
        let dir = tempfile::tempdir().unwrap();
        let exp = Experiment::new(synthetic_config(dir.path(), seed)).unwrap();
        tokens_in_corpus = exp.data.train.len();
        exp.analyze().unwrap();
        for (i, &lambda) in SWEEP_LAMBDAS.iter().enumerate() {
            let report = exp.train(lambda).unwrap();
            reg[i].push(report.final_record().reg_value);
        }
        for (i, record) in exp.evaluate(&SWEEP_LAMBDAS).unwrap().into_iter().enumerate() {
            mu[i].push(record.summaries[0].mu);
            ppl[i].push(record.ppl.unwrap());
            let text = corpus::read_tokens(&exp.text_path(record.lambda), CorpusKind::Generated).unwrap();
            let stream = exp.data.vocab.encode(&text, CorpusKind::Generated).unwrap();
            assert_eq!(stream.len(), 100_000);
            let (kl, unseen) = unigram_kl(&stream.ids, exp.data.vocab.counts());
            worst_kl = worst_kl.max(kl);
            worst_unseen = worst_unseen.max(unseen);
        }
        println!(
            "  seed {seed}: reg {:?} mu {:?} ppl {:?}",
            reg.iter().map(|r| format!("{:.3e}", r.last().unwrap())).collect::<Vec<_>>(),
            mu.iter().map(|r| format!("{:.4}", r.last().unwrap())).collect::<Vec<_>>(),
            ppl.iter().map(|r| format!("{:.3}", r.last().unwrap())).collect::<Vec<_>>(),
        );
    }
    let t = start.elapsed();
    let (reg, mu, ppl): (Vec<f64>, Vec<f64>, Vec<f64>) =
        (reg.iter().map(|r| mean(r)).collect(), mu.iter().map(|r| mean(r)).collect(), ppl.iter().map(|r| mean(r)).collect());
    let a = reg.windows(2).all(|w| w[1] < w[0]);
    let b = mu[l - 1] < mu[0];
    let c = (ppl[l - 1] / ppl[0] - 1.0).abs() <= 0.15;
    let kl = worst_kl < 0.5 && worst_unseen < 1e-3;
    let runtime = t.as_secs_f64() < 30.0 * 60.0;
    verdict(
        8,
        a && b && c && kl && runtime,
        &format!(
            "train {tokens_in_corpus} tokens, {SWEEP_EPOCHS} epochs, λ {SWEEP_LAMBDAS:?}, means over seeds {SWEEP_SEEDS:?}: \
             (a) ‖NB‖² {reg:?} strictly decreasing {a}; (b) generated fixed μ {mu:?}, μ(0.5) < μ(0) {b}; \
             (c) ppl {ppl:?}, within 15% {c}; unigram KL max {worst_kl:.3} (<0.5), mass on tokens unseen in training max {worst_unseen:.1e} (<1e-3) {kl}; runtime {t:.0?} (<30 min) {runtime}"
        ),
    );
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_9_determinism() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let run = |dir: &Path| {
        let mut config = synthetic_config(dir, 11);
        config.corpus.synthetic = Some(SyntheticSpec {
            tokens: 8000,
            ..Default::default()
        });
        config.schemes = vec![ContextScheme::fixed(), ContextScheme::exponential()];
        config.lambdas = vec![0.0, 0.5];
        config.model = LmConfig {
            hidden: 16,
            embed_dim: 8,
            epochs: 2,
            dropout: 0.1,
            ..LmConfig::desk_scale()
        };
        config.generation = GenerationConfig {
            num_seeds: 30,
            max_len: 100,
            total_tokens_target: 2500,
            seed: 0,
        };
        let exp = Experiment::new(config).unwrap();
        exp.analyze().unwrap();
        for l in [0.0, 0.5] {
            exp.train(l).unwrap();
            exp.generate(l).unwrap();
        }
        exp.evaluate(&[0.0, 0.5]).unwrap();
        exp.report().unwrap();
        snapshot(dir)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (first, second) = (run(a.path()), run(b.path()));
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let pass = first.len() == second.len() && differing.is_empty() && first.len() >= 20;
    verdict(
        9,
        pass,
        &format!("two full pipeline runs: {} files each, differing {differing:?}", first.len()),
    );
}
