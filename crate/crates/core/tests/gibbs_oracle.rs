//! Exhaustive check of the collapsed sampler on two documents of two tokens
//! each, V = 2, K = 2: all 16 assignment states are enumerated and scored with
//! the collapsed joint written as rising factorials.

use filingtopics_core::lda::{GibbsSampler, LdaConfig};
use filingtopics_core::DocumentTermMatrix;

const K: usize = 2;
const V: usize = 2;

/// Γ(a + n) / Γ(a).
fn rising(a: f64, n: usize) -> f64 {
    (0..n).map(|j| a + j as f64).product()
}

fn joint(words: &[Vec<u32>], z: &[Vec<u16>], alpha: f64, eta: f64) -> f64 {
    let mut n_dk = vec![[0usize; K]; words.len()];
    let mut n_kw = [[0usize; V]; K];
    for (d, (ws, zs)) in words.iter().zip(z).enumerate() {
        for (&w, &t) in ws.iter().zip(zs) {
            n_dk[d][t as usize] += 1;
            n_kw[t as usize][w as usize] += 1;
        }
    }
    let mut p = 1.0;
    for (d, row) in n_dk.iter().enumerate() {
        p /= rising(K as f64 * alpha, words[d].len());
        for &c in row {
            p *= rising(alpha, c);
        }
    }
    for row in &n_kw {
        p /= rising(V as f64 * eta, row.iter().sum());
        for &c in row {
            p *= rising(eta, c);
        }
    }
    p
}

fn state(bits: usize) -> Vec<Vec<u16>> {
    let b = |i: usize| ((bits >> i) & 1) as u16;
    vec![vec![b(0), b(1)], vec![b(2), b(3)]]
}

fn micro_dtm() -> DocumentTermMatrix {
    DocumentTermMatrix::from_triples(2, 2, [(0, 0, 1), (0, 1, 1), (1, 1, 2)]).unwrap()
}

fn config(alpha: f64, eta: f64) -> LdaConfig {
    LdaConfig {
        k: K,
        alpha,
        eta,
        sweeps: 1,
        burn_in: 0,
        seed: 11,
    }
}

fn words_of(sampler: &GibbsSampler) -> Vec<Vec<u32>> {
    (0..2).map(|d| sampler.document_words(d).to_vec()).collect()
}

#[test]
fn conditionals_match_enumeration() {
    let dtm = micro_dtm();
    for (alpha, eta) in [(0.5, 0.1), (25.0, 0.1), (0.01, 3.0), (1.0, 1.0)] {
        for bits in 0..16 {
            let z = state(bits);
            let mut sampler =
                GibbsSampler::with_assignments(&dtm, config(alpha, eta), z.clone()).unwrap();
            let words = words_of(&sampler);
            for d in 0..2 {
                for i in 0..2 {
                    let mut weights = [0.0; K];
                    for (t, w) in weights.iter_mut().enumerate() {
                        let mut zt = z.clone();
                        zt[d][i] = t as u16;
                        *w = joint(&words, &zt, alpha, eta);
                    }
                    let total: f64 = weights.iter().sum();
                    let got = sampler.conditional(d, i);
                    for t in 0..K {
                        let expected = weights[t] / total;
                        assert!(
                            (got[t] - expected).abs() < 1e-12,
                            "alpha {alpha} eta {eta} state {bits:04b} token ({d},{i}) topic {t}: \
                             {} vs {expected}",
                            got[t]
                        );
                    }
                }
            }
        }
    }
}

// Systematic-scan Gibbs leaves the collapsed posterior invariant, so long-run
// state frequencies must approach it.
#[test]
fn long_run_frequencies_match_posterior() {
    let dtm = micro_dtm();
    let (alpha, eta) = (0.5, 0.3);
    let mut cfg = config(alpha, eta);
    cfg.sweeps = 200_001;
    let mut sampler = GibbsSampler::with_assignments(&dtm, cfg, state(0)).unwrap();
    let words = words_of(&sampler);

    let posterior: Vec<f64> = (0..16)
        .map(|b| joint(&words, &state(b), alpha, eta))
        .collect();
    let norm: f64 = posterior.iter().sum();

    let runs = 200_000;
    let mut visits = [0usize; 16];
    for _ in 0..runs {
        sampler.sweep().unwrap();
        let z = sampler.assignments();
        let bits = z[0][0] as usize
            | (z[0][1] as usize) << 1
            | (z[1][0] as usize) << 2
            | (z[1][1] as usize) << 3;
        visits[bits] += 1;
    }
    for b in 0..16 {
        let freq = visits[b] as f64 / runs as f64;
        let p = posterior[b] / norm;
        assert!((freq - p).abs() < 0.01, "state {b:04b}: {freq} vs {p}");
    }
}

#[test]
fn counts_survive_many_sweeps() {
    let dtm = micro_dtm();
    let mut cfg = config(0.5, 0.1);
    cfg.sweeps = 1000;
    let mut sampler = GibbsSampler::new(&dtm, cfg).unwrap();
    for _ in 0..1000 {
        sampler.sweep().unwrap();
        sampler.check_counts().unwrap();
    }
}
