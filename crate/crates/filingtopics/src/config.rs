//! Pipeline configuration: a TOML file with one table per stage.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveTime};
use filingtopics_core::relevance::{DEFAULT_LAMBDA, DEFAULT_TOP_TERMS};
use filingtopics_core::textprep::PrepOptions;
use filingtopics_core::{CorpusFilterConfig, EventStudyConfig, LdaConfig};
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

/// Every key with its default, shown by `--help`.
pub const KEYS_HELP: &str = "\
CONFIG KEYS (TOML; relative paths resolve against the config file's directory)
  seed = 1                        seeds the sampler, the bootstrap and synth
  [paths]
    metadata                      filing_id,cik,ticker,firm_name,filed_at,text_path CSV
    text_root = \".\"               base directory of text_path entries
    prices                        date,ticker,adj_close CSV
    market                        date,adj_close CSV of the market index
    stopwords                     one word per line, # comments (default: bundled list)
    labels                        topic_id<TAB>label lines (optional)
    out = \"out\"                   artifact directory
  [corpus]
    min_words = 150               minimum whitespace tokens in the raw text
    min_price = 5.0               minimum close on or before the filing date
    allowed_tickers               list of admitted tickers (default: all)
    start_date, end_date          inclusive filing-date range, \"YYYY-MM-DD\"
  [textprep]
    min_doc_frequency = 0.05      keep stems in at least this share of filings
    min_token_len = 3             shorter alphabetic tokens are dropped
  [lda]
    k = 20                        number of topics
    alpha                         document-topic prior (default 50/k)
    eta = 0.1                     topic-word prior
    sweeps = 1000                 Gibbs sweeps
    burn_in = 200                 sweeps before the likelihood trace starts
  [relevance]
    lambda = 0.6                  weight of log phi against log lift
    top_terms = 30                terms listed per topic
  [events]
    est_len = 252                 estimation window in trading days
    gap = 20                      trading days between window end and event
    min_obs = 100                 minimum paired returns in the window
    market_close = \"16:00\"        filings at or after this local time count
                                  for the next trading day
  [stats]
    replicates = 200              bootstrap resamples per topic
  [synth]
    k = 5, docs = 200, vocab = 200, doc_len = 200
    alpha = 0.1, eta = 0.1        Dirichlet parameters of the true theta, phi
    shocks = [2.0, -1.0]          AR (%) per dominant topic; missing entries are 0
    days_after = 250              trading days after the first possible event";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub paths: Paths,
    pub corpus: CorpusSection,
    pub textprep: TextprepSection,
    pub lda: LdaSection,
    pub relevance: RelevanceSection,
    pub events: EventsSection,
    pub stats: StatsSection,
    pub synth: SynthSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            paths: Paths::default(),
            corpus: CorpusSection::default(),
            textprep: TextprepSection::default(),
            lda: LdaSection::default(),
            relevance: RelevanceSection::default(),
            events: EventsSection::default(),
            stats: StatsSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub metadata: Option<PathBuf>,
    pub text_root: PathBuf,
    pub prices: Option<PathBuf>,
    pub market: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            metadata: None,
            text_root: PathBuf::from("."),
            prices: None,
            market: None,
            stopwords: None,
            labels: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub min_words: usize,
    pub min_price: f64,
    pub allowed_tickers: Option<Vec<String>>,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let d = CorpusFilterConfig::default();
        CorpusSection {
            min_words: d.min_words,
            min_price: d.min_price,
            allowed_tickers: None,
            start_date: None,
            end_date: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub min_doc_frequency: f64,
    pub min_token_len: usize,
}

impl Default for TextprepSection {
    fn default() -> Self {
        let d = PrepOptions::default();
        TextprepSection {
            min_doc_frequency: d.min_doc_frequency,
            min_token_len: d.min_token_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub k: usize,
    pub alpha: Option<f64>,
    pub eta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        let d = LdaConfig::default();
        LdaSection {
            k: d.k,
            alpha: None,
            eta: d.eta,
            sweeps: d.sweeps,
            burn_in: d.burn_in,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelevanceSection {
    pub lambda: f64,
    pub top_terms: usize,
}

impl Default for RelevanceSection {
    fn default() -> Self {
        RelevanceSection {
            lambda: DEFAULT_LAMBDA,
            top_terms: DEFAULT_TOP_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventsSection {
    pub est_len: usize,
    pub gap: usize,
    pub min_obs: usize,
    pub market_close: String,
}

impl Default for EventsSection {
    fn default() -> Self {
        let d = EventStudyConfig::default();
        EventsSection {
            est_len: d.est_len,
            gap: d.gap,
            min_obs: d.min_obs,
            market_close: d.market_close.format("%H:%M").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub replicates: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection { replicates: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub k: usize,
    pub docs: usize,
    pub vocab: usize,
    pub doc_len: usize,
    pub alpha: f64,
    pub eta: f64,
    pub shocks: Vec<f64>,
    pub days_after: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            k: 5,
            docs: 200,
            vocab: 200,
            doc_len: 200,
            alpha: 0.1,
            eta: 0.1,
            shocks: vec![2.0, -1.0],
            days_after: 250,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
}

impl Config {
    /// Reads a config file and makes its relative paths absolute against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config: Config = toml::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.paths.resolve(base);
        Ok(config)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.paths.out = out.clone();
        }
        if let Some(k) = overrides.k {
            self.lda.k = k;
        }
        if let Some(lambda) = overrides.lambda {
            self.relevance.lambda = lambda;
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if !(self.corpus.min_price >= 0.0 && self.corpus.min_price.is_finite()) {
            return bad(format!(
                "corpus.min_price must be >= 0, got {}",
                self.corpus.min_price
            ));
        }
        if let (Some(s), Some(e)) = (self.corpus.start_date, self.corpus.end_date) {
            if s > e {
                return bad(format!("corpus.start_date {s} is after end_date {e}"));
            }
        }
        if !(0.0..=1.0).contains(&self.textprep.min_doc_frequency) {
            return bad(format!(
                "textprep.min_doc_frequency must lie in [0, 1], got {}",
                self.textprep.min_doc_frequency
            ));
        }
        self.lda_config()
            .validate()
            .map_err(|e| PipelineError::Config(format!("lda: {e}")))?;
        if !(0.0..=1.0).contains(&self.relevance.lambda) {
            return bad(format!(
                "relevance.lambda must lie in [0, 1], got {}",
                self.relevance.lambda
            ));
        }
        if self.relevance.top_terms == 0 {
            return bad("relevance.top_terms must be at least 1".into());
        }
        self.event_config()?;
        if self.stats.replicates == 0 {
            return bad("stats.replicates must be at least 1".into());
        }
        Ok(())
    }

    pub fn filter_config(&self) -> CorpusFilterConfig {
        let c = &self.corpus;
        let date_range = match (c.start_date, c.end_date) {
            (None, None) => None,
            (s, e) => Some((s.unwrap_or(NaiveDate::MIN), e.unwrap_or(NaiveDate::MAX))),
        };
        CorpusFilterConfig {
            min_words: c.min_words,
            min_price: c.min_price,
            allowed_tickers: c
                .allowed_tickers
                .as_ref()
                .map(|t| t.iter().cloned().collect::<BTreeSet<_>>()),
            date_range,
        }
    }

    pub fn prep_options(&self) -> PrepOptions {
        PrepOptions {
            min_doc_frequency: self.textprep.min_doc_frequency,
            min_token_len: self.textprep.min_token_len,
        }
    }

    pub fn lda_config(&self) -> LdaConfig {
        let l = &self.lda;
        let defaults = LdaConfig::new(l.k);
        LdaConfig {
            k: l.k,
            alpha: l.alpha.unwrap_or(defaults.alpha),
            eta: l.eta,
            sweeps: l.sweeps,
            burn_in: l.burn_in,
            seed: self.seed,
        }
    }

    pub fn event_config(&self) -> Result<EventStudyConfig, PipelineError> {
        let e = &self.events;
        let market_close = NaiveTime::parse_from_str(&e.market_close, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(&e.market_close, "%H:%M:%S"))
            .map_err(|_| {
                PipelineError::Config(format!(
                    "events.market_close must be HH:MM, got {:?}",
                    e.market_close
                ))
            })?;
        if e.est_len == 0 {
            return Err(PipelineError::Config(
                "events.est_len must be at least 1".into(),
            ));
        }
        Ok(EventStudyConfig {
            est_len: e.est_len,
            gap: e.gap,
            min_obs: e.min_obs,
            market_close,
        })
    }

    pub fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, PipelineError> {
        path.as_deref()
            .ok_or_else(|| PipelineError::Config(format!("paths.{key} is not set")))
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.metadata,
            &mut self.prices,
            &mut self.market,
            &mut self.stopwords,
            &mut self.labels,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
        join(&mut self.text_root);
        join(&mut self.out);
    }
}
