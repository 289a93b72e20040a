//! Term relevance for topic interpretation:
//! `r(n, k | λ) = λ·ln φ_kn + (1 − λ)·ln(φ_kn / p_n)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lda::{assign_all, LdaModel};
use crate::textprep::{DocumentTermMatrix, Vocabulary};

pub const DEFAULT_LAMBDA: f64 = 0.6;
pub const DEFAULT_TOP_TERMS: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum RelevanceError {
    #[error("probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("lambda must lie in [0, 1], got {0}")]
    InvalidLambda(f64),
    #[error("topic {topic} out of range (K = {k})")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("at least one term must be requested")]
    NoTerms,
    #[error("vocabulary has {vocab} terms but the model has {model}")]
    VocabularyMismatch { vocab: usize, model: usize },
}

/// Corpus-wide marginal term probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceContext {
    marginal: Vec<f64>,
}

impl RelevanceContext {
    pub fn from_probabilities(marginal: Vec<f64>) -> Self {
        RelevanceContext { marginal }
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }
}

/// p_n = corpus count of term n / total tokens.
pub fn marginal_term_probs(dtm: &DocumentTermMatrix) -> RelevanceContext {
    let total = dtm.total_tokens() as f64;
    let marginal = dtm
        .term_totals()
        .into_iter()
        .map(|c| c as f64 / total)
        .collect();
    RelevanceContext { marginal }
}

fn check_probability(p: f64) -> Result<(), RelevanceError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(RelevanceError::InvalidProbability(p))
    }
}

pub fn relevance(phi: f64, marginal: f64, lambda: f64) -> Result<f64, RelevanceError> {
    check_probability(phi)?;
    check_probability(marginal)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RelevanceError::InvalidLambda(lambda));
    }
    Ok(lambda * libm::log(phi) + (1.0 - lambda) * libm::log(phi / marginal))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub relevance: f64,
    pub phi: f64,
    pub lift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTermRanking {
    pub topic_id: usize,
    pub lambda: f64,
    pub terms: Vec<RankedTerm>,
}

/// The `m` most relevant terms of `topic`, best first. Ties fall back to the
/// larger φ and then to the lexicographically smaller term.
pub fn top_relevant_terms(
    model: &LdaModel,
    vocabulary: &Vocabulary,
    ctx: &RelevanceContext,
    topic: usize,
    lambda: f64,
    m: usize,
) -> Result<TopicTermRanking, RelevanceError> {
    if topic >= model.k() {
        return Err(RelevanceError::TopicOutOfRange {
            topic,
            k: model.k(),
        });
    }
    if m == 0 {
        return Err(RelevanceError::NoTerms);
    }
    if vocabulary.len() != model.n_terms() || ctx.marginal.len() != model.n_terms() {
        return Err(RelevanceError::VocabularyMismatch {
            vocab: vocabulary.len(),
            model: model.n_terms(),
        });
    }
    let phi = model.phi_row(topic);
    let mut terms = phi
        .iter()
        .zip(&ctx.marginal)
        .zip(vocabulary.terms())
        .map(|((&phi, &p), term)| {
            Ok(RankedTerm {
                term: term.clone(),
                relevance: relevance(phi, p, lambda)?,
                phi,
                lift: phi / p,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    terms.sort_by(|a, b| {
        b.relevance
            .partial_cmp(&a.relevance)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.phi.partial_cmp(&a.phi).unwrap_or(Ordering::Equal))
            .then_with(|| a.term.cmp(&b.term))
    });
    terms.truncate(m);
    Ok(TopicTermRanking {
        topic_id: topic,
        lambda,
        terms,
    })
}

/// Per-topic record used for labelling topics and for the topic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub label: Option<String>,
    pub terms: Vec<RankedTerm>,
    pub doc_count: usize,
    /// Mean token count of the documents assigned to this topic; 0 when none.
    pub mean_doc_length: f64,
}

/// Builds one [`TopicSummary`] per topic. `labels` maps topic ids to the
/// analyst's names; unmapped topics keep `label: None`.
pub fn export_topic_data(
    model: &LdaModel,
    vocabulary: &Vocabulary,
    ctx: &RelevanceContext,
    dtm: &DocumentTermMatrix,
    lambda: f64,
    m: usize,
    labels: &BTreeMap<usize, String>,
) -> Result<Vec<TopicSummary>, RelevanceError> {
    let k = model.k();
    let mut counts = vec![0usize; k];
    let mut lengths = vec![0u64; k];
    for (d, topic) in assign_all(model).into_iter().enumerate() {
        if let Some(t) = topic {
            counts[t] += 1;
            lengths[t] += dtm.doc_lengths().get(d).copied().unwrap_or(0);
        }
    }
    (0..k)
        .map(|t| {
            let ranking = top_relevant_terms(model, vocabulary, ctx, t, lambda, m)?;
            Ok(TopicSummary {
                topic_id: t,
                label: labels.get(&t).cloned(),
                terms: ranking.terms,
                doc_count: counts[t],
                mean_doc_length: if counts[t] == 0 {
                    0.0
                } else {
                    lengths[t] as f64 / counts[t] as f64
                },
            })
        })
        .collect()
}
