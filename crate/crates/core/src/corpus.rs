//! Filings, the inclusion filters applied before text processing, and the
//! per-year corpus description.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventstudy::PriceStore;
use crate::stats::{summary_stats, SummaryStats};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("duplicate filing_id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilingRecord {
    pub filing_id: String,
    pub cik: String,
    pub ticker: String,
    pub firm_name: String,
    pub filed_at: DateTime<FixedOffset>,
    pub text: String,
    /// Whitespace-separated token count of the raw text.
    pub word_count: usize,
}

impl FilingRecord {
    pub fn new(
        filing_id: impl Into<String>,
        cik: impl Into<String>,
        ticker: impl Into<String>,
        firm_name: impl Into<String>,
        filed_at: DateTime<FixedOffset>,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        FilingRecord {
            filing_id: filing_id.into(),
            cik: cik.into(),
            ticker: ticker.into(),
            firm_name: firm_name.into(),
            filed_at,
            word_count: raw_word_count(&text),
            text,
        }
    }

    /// Calendar date of the filing in its own recorded offset.
    pub fn filed_date(&self) -> NaiveDate {
        self.filed_at.date_naive()
    }
}

pub fn raw_word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// One applied filter and how many filings it removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStep {
    pub name: String,
    pub removed: usize,
}

/// Filings ordered by `(filed_at, filing_id)` plus the log of filters that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    filings: Vec<FilingRecord>,
    provenance: Vec<FilterStep>,
}

impl Corpus {
    pub fn new(mut filings: Vec<FilingRecord>) -> Result<Self, CorpusError> {
        filings.sort_by(|a, b| (a.filed_at, &a.filing_id).cmp(&(b.filed_at, &b.filing_id)));
        let mut seen = BTreeSet::new();
        for f in &filings {
            if !seen.insert(f.filing_id.as_str()) {
                return Err(CorpusError::DuplicateId(f.filing_id.clone()));
            }
        }
        Ok(Corpus {
            filings,
            provenance: Vec::new(),
        })
    }

    pub fn filings(&self) -> &[FilingRecord] {
        &self.filings
    }

    pub fn provenance(&self) -> &[FilterStep] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.filings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filings.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.filings.iter().map(|f| f.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFilterConfig {
    pub min_words: usize,
    /// Minimum close price per share.
    pub min_price: f64,
    /// Exchange membership; `None` admits every ticker.
    pub allowed_tickers: Option<BTreeSet<String>>,
    /// Inclusive range of filing dates.
    pub date_range: Option<(NaiveDate, NaiveDate)>,
}

impl Default for CorpusFilterConfig {
    fn default() -> Self {
        CorpusFilterConfig {
            min_words: 150,
            min_price: 5.0,
            allowed_tickers: None,
            date_range: None,
        }
    }
}

impl CorpusFilterConfig {
    /// Thresholds at zero and no ticker or date restriction.
    pub fn permissive() -> Self {
        CorpusFilterConfig {
            min_words: 0,
            min_price: 0.0,
            allowed_tickers: None,
            date_range: None,
        }
    }
}

/// Filter names in the order they are checked. A filing failing several
/// predicates is counted once, against the first.
pub const FILTER_NAMES: [&str; 5] = [
    "allowed_tickers",
    "date_range",
    "min_words",
    "price_unmatched",
    "min_price",
];

fn first_failing_filter(
    filing: &FilingRecord,
    config: &CorpusFilterConfig,
    prices: &PriceStore,
) -> Option<usize> {
    if let Some(allowed) = &config.allowed_tickers {
        if !allowed.contains(&filing.ticker) {
            return Some(0);
        }
    }
    let date = filing.filed_date();
    if let Some((start, end)) = config.date_range {
        if date < start || date > end {
            return Some(1);
        }
    }
    if filing.word_count < config.min_words {
        return Some(2);
    }
    match prices.close_on_or_before(&filing.ticker, date) {
        None => Some(3),
        Some(p) if p < config.min_price => Some(4),
        Some(_) => None,
    }
}

/// Keeps the filings passing every inclusion filter and appends one
/// provenance entry per filter.
pub fn filter_corpus(corpus: &Corpus, config: &CorpusFilterConfig, prices: &PriceStore) -> Corpus {
    let mut removed = [0usize; FILTER_NAMES.len()];
    let filings = corpus
        .filings
        .iter()
        .filter(|f| match first_failing_filter(f, config, prices) {
            Some(i) => {
                removed[i] += 1;
                false
            }
            None => true,
        })
        .cloned()
        .collect();
    let mut provenance = corpus.provenance.clone();
    provenance.extend(
        FILTER_NAMES
            .iter()
            .zip(removed)
            .map(|(name, removed)| FilterStep {
                name: String::from(*name),
                removed,
            }),
    );
    Corpus {
        filings,
        provenance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: i32,
    pub total_filings: usize,
    /// Distinct tickers filing in the year.
    pub covered_firms: usize,
    pub mean_stemmed_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDescriptives {
    pub years: Vec<YearRow>,
    pub firm_count: usize,
    /// Distribution of filing counts across firms; `None` for an empty corpus.
    pub filings_per_firm: Option<SummaryStats>,
}

/// Per-year counts and lengths. `lengths[i]` is the stemmed length of the
/// i-th filing in corpus order.
pub fn corpus_descriptives(corpus: &Corpus, lengths: &[u64]) -> CorpusDescriptives {
    assert_eq!(
        corpus.len(),
        lengths.len(),
        "lengths must align with the corpus"
    );
    struct Acc<'a> {
        filings: usize,
        firms: BTreeSet<&'a str>,
        length: u64,
    }
    let mut years: BTreeMap<i32, Acc> = BTreeMap::new();
    let mut per_firm: BTreeMap<&str, usize> = BTreeMap::new();
    for (f, &len) in corpus.filings.iter().zip(lengths) {
        let acc = years.entry(f.filed_date().year()).or_insert_with(|| Acc {
            filings: 0,
            firms: BTreeSet::new(),
            length: 0,
        });
        acc.filings += 1;
        acc.firms.insert(&f.ticker);
        acc.length += len;
        *per_firm.entry(&f.ticker).or_insert(0) += 1;
    }
    let counts: Vec<f64> = per_firm.values().map(|&n| n as f64).collect();
    CorpusDescriptives {
        years: years
            .into_iter()
            .map(|(year, acc)| YearRow {
                year,
                total_filings: acc.filings,
                covered_firms: acc.firms.len(),
                mean_stemmed_length: acc.length as f64 / acc.filings as f64,
            })
            .collect(),
        firm_count: per_firm.len(),
        filings_per_firm: summary_stats(&counts).ok(),
    }
}
