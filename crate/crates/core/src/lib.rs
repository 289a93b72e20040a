//! Allocation-only core of the filing-topics toolkit.
//!
//! Everything here is pure computation over in-memory data: turning filing
//! text into a document-term matrix, fitting latent Dirichlet allocation with
//! a collapsed Gibbs sampler, ranking topic terms by relevance, measuring
//! market-model abnormal returns, and the per-topic hypothesis tests. File
//! formats, the CLI and the synthetic-data generator live in the `filingtopics`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod eventstudy;
pub mod lda;
pub mod relevance;
pub mod stats;
pub mod textprep;

pub use corpus::{Corpus, CorpusFilterConfig, FilingRecord};
pub use eventstudy::{EventResult, EventStudyConfig, PriceSeries, PriceStore};
pub use lda::{LdaConfig, LdaModel};
pub use relevance::RelevanceContext;
pub use stats::{SummaryStats, TestResult};
pub use textprep::{DocumentTermMatrix, StopwordList, Vocabulary};
