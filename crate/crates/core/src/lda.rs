//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! θ and φ are integrated out; each sweep resamples every token's topic from
//!
//! ```text
//! P(z_i = k | z_-i, w) ∝ (n_dk + α) · (n_kw + η) / (n_k + V·η)
//! ```
//!
//! with all counts excluding token i. The point estimates reported in
//! [`LdaModel`] come from the final state of the chain.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::DocumentTermMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum LdaError {
    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("every document is empty; nothing to sample")]
    NoDocuments,
    #[error("non-finite sampling weight in document {doc}; check alpha and eta")]
    NonFinite { doc: usize },
    #[error(
        "model is {model_docs} docs x {model_terms} terms but matrix is {dtm_docs} x {dtm_terms}"
    )]
    DimensionMismatch {
        model_docs: usize,
        model_terms: usize,
        dtm_docs: usize,
        dtm_terms: usize,
    },
    #[error("document {0} is empty and unassignable")]
    Unassignable(usize),
    #[error("document {doc} out of range ({n_docs} documents)")]
    DocOutOfRange { doc: usize, n_docs: usize },
    #[error("topic {topic} out of range (K = {k})")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("count tables disagree with assignments: {0}")]
    CountMismatch(&'static str),
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    /// Number of topics.
    pub k: usize,
    /// Symmetric document-topic Dirichlet prior.
    pub alpha: f64,
    /// Symmetric topic-word Dirichlet prior.
    pub eta: f64,
    /// Total Gibbs sweeps.
    pub sweeps: usize,
    /// Sweeps before the log-likelihood trace starts.
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults for `k` topics: α = 50/K, η = 0.1, 1000 sweeps, 200 burn-in.
    pub fn new(k: usize) -> Self {
        LdaConfig {
            k,
            alpha: if k == 0 { 0.0 } else { 50.0 / k as f64 },
            eta: 0.1,
            sweeps: 1000,
            burn_in: 200,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        if self.k == 0 {
            return Err(LdaError::InvalidConfig("k must be at least 1"));
        }
        if self.k > u16::MAX as usize {
            return Err(LdaError::InvalidConfig("k is too large"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(LdaError::InvalidConfig("alpha must be positive and finite"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(LdaError::InvalidConfig("eta must be positive and finite"));
        }
        if self.burn_in >= self.sweeps {
            return Err(LdaError::InvalidConfig(
                "burn_in must be smaller than sweeps",
            ));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::new(20)
    }
}

/// Sweeps between successive log-likelihood trace points.
const TRACE_EVERY: usize = 50;

/// Chain state and sampler. Exposed so callers can step the chain and inspect
/// the conditionals; [`fit_lda`] covers the usual case.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    config: LdaConfig,
    n_terms: usize,
    // Token word ids per document, expanded from the sparse rows.
    words: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    empty_docs: Vec<bool>,
    rng: ChaCha8Rng,
    sweeps_done: usize,
    weights: Vec<f64>,
    trace: Vec<(usize, f64)>,
}

impl GibbsSampler {
    /// Initializes every token's topic uniformly at random.
    pub fn new(dtm: &DocumentTermMatrix, config: LdaConfig) -> Result<Self, LdaError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let words = expand_tokens(dtm);
        let k = config.k;
        let assignments = words
            .iter()
            .map(|doc| doc.iter().map(|_| rng.random_range(0..k) as u16).collect())
            .collect();
        Self::from_parts(dtm, config, words, assignments, rng)
    }

    /// Starts the chain from explicit assignments, one per token in the order
    /// of [`GibbsSampler::document_words`].
    pub fn with_assignments(
        dtm: &DocumentTermMatrix,
        config: LdaConfig,
        assignments: Vec<Vec<u16>>,
    ) -> Result<Self, LdaError> {
        config.validate()?;
        let words = expand_tokens(dtm);
        if assignments.len() != words.len()
            || assignments
                .iter()
                .zip(&words)
                .any(|(a, w)| a.len() != w.len())
        {
            return Err(LdaError::InvalidConfig(
                "assignment shape differs from the matrix",
            ));
        }
        if assignments
            .iter()
            .flatten()
            .any(|&z| z as usize >= config.k)
        {
            return Err(LdaError::InvalidConfig("assignment topic id out of range"));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::from_parts(dtm, config, words, assignments, rng)
    }

    fn from_parts(
        dtm: &DocumentTermMatrix,
        config: LdaConfig,
        words: Vec<Vec<u32>>,
        assignments: Vec<Vec<u16>>,
        rng: ChaCha8Rng,
    ) -> Result<Self, LdaError> {
        let empty_docs: Vec<bool> = words.iter().map(Vec::is_empty).collect();
        if empty_docs.iter().all(|&e| e) {
            return Err(LdaError::NoDocuments);
        }
        let k = config.k;
        let n_terms = dtm.n_terms();
        let mut sampler = GibbsSampler {
            n_terms,
            doc_topic: vec![0; words.len() * k],
            topic_word: vec![0; k * n_terms],
            topic_totals: vec![0; k],
            weights: vec![0.0; k],
            words,
            assignments,
            empty_docs,
            rng,
            sweeps_done: 0,
            trace: Vec::new(),
            config,
        };
        sampler.recount();
        Ok(sampler)
    }

    fn recount(&mut self) {
        let (doc_topic, topic_word, topic_totals) = self.tally();
        self.doc_topic = doc_topic;
        self.topic_word = topic_word;
        self.topic_totals = topic_totals;
    }

    fn tally(&self) -> (Vec<u32>, Vec<u32>, Vec<u64>) {
        let k = self.config.k;
        let mut doc_topic = vec![0u32; self.words.len() * k];
        let mut topic_word = vec![0u32; k * self.n_terms];
        let mut topic_totals = vec![0u64; k];
        for (d, (words, zs)) in self.words.iter().zip(&self.assignments).enumerate() {
            for (&w, &z) in words.iter().zip(zs) {
                let z = z as usize;
                doc_topic[d * k + z] += 1;
                topic_word[z * self.n_terms + w as usize] += 1;
                topic_totals[z] += 1;
            }
        }
        (doc_topic, topic_word, topic_totals)
    }

    /// Verifies the count tables against a fresh tally of the assignments and
    /// checks the row-sum identities.
    pub fn check_counts(&self) -> Result<(), LdaError> {
        let (doc_topic, topic_word, topic_totals) = self.tally();
        if doc_topic != self.doc_topic {
            return Err(LdaError::CountMismatch("document-topic table"));
        }
        if topic_word != self.topic_word {
            return Err(LdaError::CountMismatch("topic-word table"));
        }
        if topic_totals != self.topic_totals {
            return Err(LdaError::CountMismatch("topic totals"));
        }
        let k = self.config.k;
        for (d, words) in self.words.iter().enumerate() {
            let row: u64 = self.doc_topic[d * k..(d + 1) * k]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if row != words.len() as u64 {
                return Err(LdaError::CountMismatch("document row sum"));
            }
        }
        for t in 0..k {
            let row: u64 = self.topic_word[t * self.n_terms..(t + 1) * self.n_terms]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if row != self.topic_totals[t] {
                return Err(LdaError::CountMismatch("topic row sum"));
            }
        }
        let tokens: u64 = self.words.iter().map(|w| w.len() as u64).sum();
        if self.topic_totals.iter().sum::<u64>() != tokens {
            return Err(LdaError::CountMismatch("total token count"));
        }
        Ok(())
    }

    /// Unnormalized full-conditional weights for a token of word `w` in
    /// document `d`. When `holding` is set, the counts are read as if a token
    /// currently assigned to that topic had been removed.
    fn fill_weights(&mut self, d: usize, w: usize, holding: Option<usize>) -> f64 {
        let k = self.config.k;
        let alpha = self.config.alpha;
        let eta = self.config.eta;
        let v_eta = self.n_terms as f64 * eta;
        let mut total = 0.0;
        for t in 0..k {
            let minus = u32::from(holding == Some(t));
            let ndk = f64::from(self.doc_topic[d * k + t] - minus);
            let nkw = f64::from(self.topic_word[t * self.n_terms + w] - minus);
            let nk = (self.topic_totals[t] - u64::from(minus)) as f64;
            let weight = (ndk + alpha) * (nkw + eta) / (nk + v_eta);
            self.weights[t] = weight;
            total += weight;
        }
        total
    }

    /// Normalized full conditional P(z_i = k | z_-i, w) for token `i` of
    /// document `d`, leaving the chain untouched.
    pub fn conditional(&mut self, d: usize, i: usize) -> Vec<f64> {
        let w = self.words[d][i] as usize;
        let current = self.assignments[d][i] as usize;
        let total = self.fill_weights(d, w, Some(current));
        self.weights.iter().map(|&x| x / total).collect()
    }

    /// One full pass over every token.
    pub fn sweep(&mut self) -> Result<(), LdaError> {
        let k = self.config.k;
        let n_terms = self.n_terms;
        for d in 0..self.words.len() {
            for i in 0..self.words[d].len() {
                let w = self.words[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.doc_topic[d * k + old] -= 1;
                self.topic_word[old * n_terms + w] -= 1;
                self.topic_totals[old] -= 1;

                let total = self.fill_weights(d, w, None);
                if !(total.is_finite() && total > 0.0) {
                    return Err(LdaError::NonFinite { doc: d });
                }
                let mut u = self.rng.random::<f64>() * total;
                let mut new = k - 1;
                for (t, &weight) in self.weights.iter().enumerate() {
                    if u < weight {
                        new = t;
                        break;
                    }
                    u -= weight;
                }

                self.assignments[d][i] = new as u16;
                self.doc_topic[d * k + new] += 1;
                self.topic_word[new * n_terms + w] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps_done += 1;
        debug_assert_eq!(self.check_counts(), Ok(()));
        if self.sweeps_done > self.config.burn_in
            && (self.sweeps_done - self.config.burn_in).is_multiple_of(TRACE_EVERY)
        {
            self.trace.push((self.sweeps_done, self.log_likelihood()));
        }
        Ok(())
    }

    /// Collapsed log P(w | z) of the current state.
    pub fn log_likelihood(&self) -> f64 {
        let k = self.config.k;
        let eta = self.config.eta;
        let v = self.n_terms as f64;
        let lg_eta = libm::lgamma(eta);
        let mut ll = k as f64 * (libm::lgamma(v * eta) - v * lg_eta);
        for t in 0..k {
            for &c in &self.topic_word[t * self.n_terms..(t + 1) * self.n_terms] {
                if c > 0 {
                    ll += libm::lgamma(f64::from(c) + eta) - lg_eta;
                }
            }
            ll -= libm::lgamma(self.topic_totals[t] as f64 + v * eta);
        }
        ll
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn assignments(&self) -> &[Vec<u16>] {
        &self.assignments
    }

    /// Word ids of document `d`'s tokens, in sampling order.
    pub fn document_words(&self, d: usize) -> &[u32] {
        &self.words[d]
    }

    /// Point estimates from the current state.
    pub fn model(&self) -> LdaModel {
        let k = self.config.k;
        let alpha = self.config.alpha;
        let eta = self.config.eta;
        let v = self.n_terms;
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = self.topic_totals[t] as f64 + v as f64 * eta;
            for w in 0..v {
                phi[t * v + w] = (f64::from(self.topic_word[t * v + w]) + eta) / denom;
            }
        }
        let n_docs = self.words.len();
        let mut theta = vec![0.0; n_docs * k];
        for d in 0..n_docs {
            let denom = self.words[d].len() as f64 + k as f64 * alpha;
            for t in 0..k {
                theta[d * k + t] = (f64::from(self.doc_topic[d * k + t]) + alpha) / denom;
            }
        }
        LdaModel {
            config: self.config.clone(),
            n_terms: v,
            n_docs,
            phi,
            theta,
            empty_docs: self
                .empty_docs
                .iter()
                .enumerate()
                .filter_map(|(d, &e)| e.then_some(d))
                .collect(),
            trace: self.trace.clone(),
        }
    }
}

fn expand_tokens(dtm: &DocumentTermMatrix) -> Vec<Vec<u32>> {
    (0..dtm.n_docs())
        .map(|d| {
            dtm.row(d)
                .iter()
                .flat_map(|&(t, c)| core::iter::repeat_n(t, c as usize))
                .collect()
        })
        .collect()
}

/// Runs `config.sweeps` Gibbs sweeps and returns the final point estimates.
pub fn fit_lda(dtm: &DocumentTermMatrix, config: &LdaConfig) -> Result<LdaModel, LdaError> {
    let mut sampler = GibbsSampler::new(dtm, config.clone())?;
    for _ in 0..config.sweeps {
        sampler.sweep()?;
    }
    Ok(sampler.model())
}

/// Fitted topic-word (φ) and document-topic (θ) matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    config: LdaConfig,
    n_terms: usize,
    n_docs: usize,
    phi: Vec<f64>,
    theta: Vec<f64>,
    empty_docs: Vec<usize>,
    trace: Vec<(usize, f64)>,
}

impl LdaModel {
    /// Reassembles a model from row-major φ (K×V) and θ (D×K), e.g. after
    /// reading it back from disk.
    pub fn from_parts(
        config: LdaConfig,
        n_terms: usize,
        n_docs: usize,
        phi: Vec<f64>,
        theta: Vec<f64>,
        mut empty_docs: Vec<usize>,
    ) -> Result<Self, LdaError> {
        config.validate()?;
        let k = config.k;
        if phi.len() != k * n_terms || theta.len() != n_docs * k {
            return Err(LdaError::Malformed(
                "matrix sizes disagree with K, V, D".into(),
            ));
        }
        let bad_row = |m: &[f64], width: usize| {
            m.chunks(width).any(|row| {
                let s: f64 = row.iter().sum();
                (s - 1.0).abs() > 1e-9 || row.iter().any(|&x| !(x > 0.0 && x.is_finite()))
            })
        };
        if n_terms == 0 || bad_row(&phi, n_terms) || bad_row(&theta, k) {
            return Err(LdaError::Malformed(
                "rows must be strictly positive and sum to 1".into(),
            ));
        }
        empty_docs.sort_unstable();
        empty_docs.dedup();
        if empty_docs.last().is_some_and(|&d| d >= n_docs) {
            return Err(LdaError::Malformed("empty-document id out of range".into()));
        }
        Ok(LdaModel {
            config,
            n_terms,
            n_docs,
            phi,
            theta,
            empty_docs,
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.n_terms..(topic + 1) * self.n_terms]
    }

    pub fn theta_row(&self, doc: usize) -> &[f64] {
        let k = self.config.k;
        &self.theta[doc * k..(doc + 1) * k]
    }

    /// Documents that had no tokens and were never sampled.
    pub fn empty_docs(&self) -> &[usize] {
        &self.empty_docs
    }

    pub fn is_empty_doc(&self, doc: usize) -> bool {
        self.empty_docs.binary_search(&doc).is_ok()
    }

    /// `(sweep, collapsed log-likelihood)` points recorded after burn-in.
    pub fn trace(&self) -> &[(usize, f64)] {
        &self.trace
    }

    fn check_dtm(&self, dtm: &DocumentTermMatrix) -> Result<(), LdaError> {
        if dtm.n_docs() != self.n_docs || dtm.n_terms() != self.n_terms {
            return Err(LdaError::DimensionMismatch {
                model_docs: self.n_docs,
                model_terms: self.n_terms,
                dtm_docs: dtm.n_docs(),
                dtm_terms: dtm.n_terms(),
            });
        }
        Ok(())
    }
}

/// exp of the negative per-token log-likelihood of `dtm` under the mixture
/// Σ_k θ_dk φ_kn.
pub fn perplexity(model: &LdaModel, dtm: &DocumentTermMatrix) -> Result<f64, LdaError> {
    model.check_dtm(dtm)?;
    let k = model.k();
    let mut log_lik = 0.0;
    for (d, w, count) in dtm.triples() {
        let theta = model.theta_row(d);
        let p: f64 = (0..k)
            .map(|t| theta[t] * model.phi[t * model.n_terms + w])
            .sum();
        log_lik += f64::from(count) * libm::log(p);
    }
    Ok(libm::exp(-log_lik / dtm.total_tokens() as f64))
}

/// The most probable topic of a document; ties go to the lowest topic id.
pub fn assign_topic(model: &LdaModel, doc: usize) -> Result<usize, LdaError> {
    if doc >= model.n_docs {
        return Err(LdaError::DocOutOfRange {
            doc,
            n_docs: model.n_docs,
        });
    }
    if model.is_empty_doc(doc) {
        return Err(LdaError::Unassignable(doc));
    }
    let theta = model.theta_row(doc);
    let mut best = 0;
    for (t, &p) in theta.iter().enumerate().skip(1) {
        if p > theta[best] {
            best = t;
        }
    }
    Ok(best)
}

/// Topic for every document, `None` for empty ones.
pub fn assign_all(model: &LdaModel) -> Vec<Option<usize>> {
    (0..model.n_docs)
        .map(|d| assign_topic(model, d).ok())
        .collect()
}

/// One row of the topic-count sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCountDiagnostics {
    pub k: usize,
    pub perplexity: f64,
    /// Shannon entropy (nats) of the share of documents assigned to each topic.
    pub topic_size_entropy: f64,
    /// Documents assigned to each topic.
    pub histogram: Vec<usize>,
}

/// Perplexity and assignment spread for models with different K fit on the
/// same matrix.
pub fn sweep_topic_counts(
    models: &[LdaModel],
    dtm: &DocumentTermMatrix,
) -> Result<Vec<TopicCountDiagnostics>, LdaError> {
    models
        .iter()
        .map(|model| {
            let perplexity = perplexity(model, dtm)?;
            let mut histogram = vec![0usize; model.k()];
            for topic in assign_all(model).into_iter().flatten() {
                histogram[topic] += 1;
            }
            let assigned: usize = histogram.iter().sum();
            let topic_size_entropy = histogram
                .iter()
                .filter(|&&n| n > 0)
                .map(|&n| {
                    let p = n as f64 / assigned as f64;
                    -p * libm::log(p)
                })
                .sum();
            Ok(TopicCountDiagnostics {
                k: model.k(),
                perplexity,
                topic_size_entropy,
                histogram,
            })
        })
        .collect()
}
