//! The pipeline stages. Each stage reads only its inputs and the persisted
//! artifacts of earlier stages, so any stage can be rerun on its own.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use filingtopics_core::corpus::{corpus_descriptives, filter_corpus};
use filingtopics_core::eventstudy::{run_event_study, EventStatus};
use filingtopics_core::lda::{assign_all, fit_lda, sweep_topic_counts, LdaError};
use filingtopics_core::relevance::{export_topic_data, marginal_term_probs};
use filingtopics_core::stats::report::{per_topic_report, table1, table2, table3, FilingSummary};
use filingtopics_core::textprep::build_dtm;
use filingtopics_core::{Corpus, LdaModel, StopwordList};

use crate::config::Config;
use crate::error::{InStage, PipelineError};
use crate::formats::artifact::{self, DocRow};
use crate::formats::{input, tables};
use crate::manifest::{sha256_file, sha256_hex, RunManifest};
use crate::synth::{generate, SynthSpec};

/// File names inside the output directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    root: PathBuf,
}

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Artifacts { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dtm(&self) -> PathBuf {
        self.root.join("dtm.txt")
    }
    pub fn vocabulary(&self) -> PathBuf {
        self.root.join("vocab.txt")
    }
    pub fn docs(&self) -> PathBuf {
        self.root.join("docs.csv")
    }
    pub fn provenance(&self) -> PathBuf {
        self.root.join("provenance.csv")
    }
    pub fn corpus_years(&self) -> PathBuf {
        self.root.join("corpus_years.csv")
    }
    pub fn model(&self, k: usize) -> PathBuf {
        self.root.join(format!("model_k{k}.txt"))
    }
    pub fn trace(&self, k: usize) -> PathBuf {
        self.root.join(format!("trace_k{k}.csv"))
    }
    pub fn topics(&self, k: usize) -> PathBuf {
        self.root.join(format!("topics_k{k}.json"))
    }
    pub fn assignments(&self, k: usize) -> PathBuf {
        self.root.join(format!("assignments_k{k}.csv"))
    }
    pub fn events(&self) -> PathBuf {
        self.root.join("events.csv")
    }
    pub fn table(&self, n: usize) -> PathBuf {
        self.root.join(format!("table{n}.csv"))
    }
    pub fn ksweep(&self) -> PathBuf {
        self.root.join("ksweep.csv")
    }

    /// Topic counts of every `model_k{K}.txt` present, ascending.
    pub fn fitted_ks(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = std::fs::read_dir(&self.root)
            .into_iter()
            .flatten()
            .flatten()
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix("model_k")?
                    .strip_suffix(".txt")?
                    .parse()
                    .ok()
            })
            .collect();
        ks.sort_unstable();
        ks
    }
}

/// Row counts a stage reports and records in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: &'static str,
    pub rows: BTreeMap<String, usize>,
}

impl StageReport {
    fn new(stage: &'static str, rows: &[(&str, usize)]) -> Self {
        StageReport {
            stage,
            rows: rows.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn require(path: PathBuf, command: &'static str) -> Result<PathBuf, PipelineError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::Prerequisite {
            artifact: path,
            command,
        })
    }
}

fn lda_error(stage: &'static str, e: LdaError) -> PipelineError {
    match e {
        LdaError::InvalidConfig(m) => PipelineError::Config(format!("lda: {m}")),
        LdaError::CountMismatch(_) => PipelineError::Invariant {
            stage,
            message: e.to_string(),
        },
        other => PipelineError::data(stage, other),
    }
}

fn finish(
    config: &Config,
    report: StageReport,
    inputs: BTreeMap<String, String>,
    started: Instant,
) -> Result<StageReport, PipelineError> {
    RunManifest::record(
        &config.paths.out,
        config,
        report.stage,
        &report.rows,
        inputs,
        started.elapsed(),
    )
    .in_stage(report.stage)?;
    Ok(report)
}

fn read_labels(
    config: &Config,
    stage: &'static str,
) -> Result<BTreeMap<usize, String>, PipelineError> {
    match &config.paths.labels {
        Some(p) => input::read_labels(p).in_stage(stage),
        None => Ok(BTreeMap::new()),
    }
}

fn read_model_for(config: &Config, stage: &'static str) -> Result<LdaModel, PipelineError> {
    let art = Artifacts::new(&config.paths.out);
    let path = require(art.model(config.lda.k), "fit")?;
    artifact::read_model(&path).in_stage(stage)
}

/// Load, filter and preprocess the corpus; writes the document-term matrix,
/// vocabulary, filtered document list and filter log.
pub fn prep(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "prep";
    let started = Instant::now();
    config.validate()?;
    let paths = &config.paths;
    let metadata = Config::require(&paths.metadata, "metadata")?;
    let prices_path = Config::require(&paths.prices, "prices")?;

    let filings = input::read_metadata(metadata, &paths.text_root).in_stage(STAGE)?;
    let n_in = filings.len();
    let corpus = Corpus::new(filings).in_stage(STAGE)?;
    let prices = input::read_prices(prices_path).in_stage(STAGE)?;
    let filtered = filter_corpus(&corpus, &config.filter_config(), &prices);
    if filtered.is_empty() {
        let removed: Vec<String> = filtered
            .provenance()
            .iter()
            .filter(|s| s.removed > 0)
            .map(|s| format!("{} removed {}", s.name, s.removed))
            .collect();
        return Err(PipelineError::data(
            STAGE,
            format!(
                "no filings survive the corpus filters ({})",
                removed.join(", ")
            ),
        ));
    }
    let stopwords = match &paths.stopwords {
        Some(p) => input::read_stopwords(p).in_stage(STAGE)?,
        None => StopwordList::english(),
    };
    let built = build_dtm(filtered.texts(), &stopwords, &config.prep_options()).in_stage(STAGE)?;

    let art = Artifacts::new(&paths.out);
    let docs: Vec<DocRow> = filtered
        .filings()
        .iter()
        .zip(&built.stemmed_lengths)
        .map(|(f, &len)| DocRow::from_filing(f, len))
        .collect();
    artifact::write_dtm(&art.dtm(), &built.dtm).in_stage(STAGE)?;
    artifact::write_vocabulary(&art.vocabulary(), &built.vocabulary).in_stage(STAGE)?;
    artifact::write_docs(&art.docs(), &docs).in_stage(STAGE)?;
    artifact::write_provenance(&art.provenance(), filtered.provenance(), filtered.len())
        .in_stage(STAGE)?;
    let descriptives = corpus_descriptives(&filtered, &built.stemmed_lengths);
    artifact::write_corpus_years(&art.corpus_years(), &descriptives.years).in_stage(STAGE)?;

    let mut inputs = BTreeMap::new();
    inputs.insert("metadata".into(), sha256_file(metadata).in_stage(STAGE)?);
    inputs.insert("prices".into(), sha256_file(prices_path).in_stage(STAGE)?);
    if let Some(p) = &paths.stopwords {
        inputs.insert("stopwords".into(), sha256_file(p).in_stage(STAGE)?);
    }
    let mut texts = Vec::new();
    for f in corpus.filings() {
        texts.extend_from_slice(f.filing_id.as_bytes());
        texts.push(0);
        texts.extend_from_slice(f.text.as_bytes());
        texts.push(0);
    }
    inputs.insert("texts".into(), sha256_hex(&texts));

    let report = StageReport::new(
        STAGE,
        &[
            ("filings_read", n_in),
            ("filings_kept", filtered.len()),
            ("terms", built.vocabulary.len()),
            ("nonzero_entries", built.dtm.nnz()),
            ("empty_documents", built.dtm.empty_docs().len()),
        ],
    );
    finish(config, report, inputs, started)
}

/// Fits the topic model for `lda.k` topics.
pub fn fit(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "fit";
    let started = Instant::now();
    config.validate()?;
    let art = Artifacts::new(&config.paths.out);
    let dtm = artifact::read_dtm(&require(art.dtm(), "prep")?).in_stage(STAGE)?;
    let lda = config.lda_config();
    let model = fit_lda(&dtm, &lda).map_err(|e| lda_error(STAGE, e))?;
    artifact::write_model(&art.model(lda.k), &model).in_stage(STAGE)?;
    artifact::write_trace(&art.trace(lda.k), model.trace()).in_stage(STAGE)?;
    let report = StageReport::new(
        STAGE,
        &[
            ("k", lda.k),
            ("documents", dtm.n_docs()),
            ("tokens", dtm.total_tokens() as usize),
            ("empty_documents", model.empty_docs().len()),
        ],
    );
    finish(config, report, BTreeMap::new(), started)
}

/// Relevance-ranked terms per topic and the document assignments.
pub fn topics(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "topics";
    let started = Instant::now();
    config.validate()?;
    let art = Artifacts::new(&config.paths.out);
    let model = read_model_for(config, STAGE)?;
    let dtm = artifact::read_dtm(&require(art.dtm(), "prep")?).in_stage(STAGE)?;
    let vocabulary =
        artifact::read_vocabulary(&require(art.vocabulary(), "prep")?).in_stage(STAGE)?;
    let docs = artifact::read_docs(&require(art.docs(), "prep")?).in_stage(STAGE)?;
    if model.n_docs() != docs.len() {
        return Err(PipelineError::data(
            STAGE,
            format!(
                "model has {} documents but docs.csv lists {}; rerun `fit`",
                model.n_docs(),
                docs.len()
            ),
        ));
    }
    let labels = read_labels(config, STAGE)?;
    let ctx = marginal_term_probs(&dtm);
    let summaries = export_topic_data(
        &model,
        &vocabulary,
        &ctx,
        &dtm,
        config.relevance.lambda,
        config.relevance.top_terms,
        &labels,
    )
    .in_stage(STAGE)?;
    let k = model.k();
    artifact::write_topics(&art.topics(k), &summaries).in_stage(STAGE)?;
    let assigned = assign_all(&model);
    artifact::write_assignments(&art.assignments(k), &docs, &assigned).in_stage(STAGE)?;
    let report = StageReport::new(
        STAGE,
        &[
            ("topics", k),
            ("assigned_documents", assigned.iter().flatten().count()),
        ],
    );
    finish(config, report, BTreeMap::new(), started)
}

/// Abnormal returns for every filtered filing.
pub fn events(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "events";
    let started = Instant::now();
    config.validate()?;
    let art = Artifacts::new(&config.paths.out);
    let docs = artifact::read_docs(&require(art.docs(), "prep")?).in_stage(STAGE)?;
    let prices_path = Config::require(&config.paths.prices, "prices")?;
    let market_path = Config::require(&config.paths.market, "market")?;
    let corpus = Corpus::new(docs.iter().map(DocRow::to_filing).collect()).in_stage(STAGE)?;
    let prices = input::read_prices(prices_path).in_stage(STAGE)?;
    let market = input::read_market(market_path).in_stage(STAGE)?;
    let results = run_event_study(&corpus, &prices, &market, &config.event_config()?);
    artifact::write_events(&art.events(), &results).in_stage(STAGE)?;

    let mut rows = vec![(
        "ok".to_string(),
        results.iter().filter(|r| r.is_ok()).count(),
    )];
    let mut skipped: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &results {
        if let EventStatus::Skipped(reason) = r.status {
            *skipped.entry(reason.as_str()).or_insert(0) += 1;
        }
    }
    rows.extend(
        skipped
            .into_iter()
            .map(|(k, v)| (format!("skipped_{k}"), v)),
    );
    let report = StageReport {
        stage: STAGE,
        rows: rows.into_iter().collect(),
    };
    let mut inputs = BTreeMap::new();
    inputs.insert("market".into(), sha256_file(market_path).in_stage(STAGE)?);
    finish(config, report, inputs, started)
}

/// Tables 1 to 4 and the topic-count comparison over every fitted K.
pub fn report(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "report";
    let started = Instant::now();
    config.validate()?;
    let art = Artifacts::new(&config.paths.out);
    let docs = artifact::read_docs(&require(art.docs(), "prep")?).in_stage(STAGE)?;
    let events = artifact::read_events(&require(art.events(), "events")?).in_stage(STAGE)?;
    let model = read_model_for(config, STAGE)?;
    let dtm = artifact::read_dtm(&require(art.dtm(), "prep")?).in_stage(STAGE)?;
    if model.n_docs() != docs.len() {
        return Err(PipelineError::data(
            STAGE,
            format!(
                "model has {} documents but docs.csv lists {}; rerun `fit`",
                model.n_docs(),
                docs.len()
            ),
        ));
    }
    let labels = read_labels(config, STAGE)?;
    let k = model.k();

    let summaries: Vec<FilingSummary> = docs
        .iter()
        .map(|d| FilingSummary {
            filing_id: d.filing_id.clone(),
            ticker: d.ticker.clone(),
            filed_date: d.filed_date(),
            stemmed_length: d.stemmed_length,
        })
        .collect();
    let assigned = assign_all(&model);
    tables::write_table1(&art.table(1), &table1(&summaries, &events)).in_stage(STAGE)?;
    tables::write_table2(&art.table(2), &table2(&summaries, &events)).in_stage(STAGE)?;
    tables::write_table3(&art.table(3), &table3(&summaries, &assigned, k), &labels)
        .in_stage(STAGE)?;
    let topic_report = per_topic_report(
        &events,
        &artifact::assignment_map(&docs, &assigned),
        k,
        config.stats.replicates,
        config.seed,
    );
    tables::write_table4(&art.table(4), &topic_report, &labels).in_stage(STAGE)?;

    let mut models = Vec::new();
    for fitted in art.fitted_ks() {
        let m = if fitted == k {
            model.clone()
        } else {
            artifact::read_model(&art.model(fitted)).in_stage(STAGE)?
        };
        if m.n_docs() == dtm.n_docs() && m.n_terms() == dtm.n_terms() {
            models.push(m);
        }
    }
    let sweep = sweep_topic_counts(&models, &dtm).map_err(|e| lda_error(STAGE, e))?;
    tables::write_ksweep(&art.ksweep(), &sweep).in_stage(STAGE)?;

    let report = StageReport::new(
        STAGE,
        &[
            ("topics", k),
            ("ok_events", events.iter().filter(|e| e.is_ok()).count()),
            ("unassigned_events", topic_report.unassigned_events),
            (
                "significant_topics",
                topic_report
                    .rows
                    .iter()
                    .filter(|r| r.significant() == Some(true))
                    .count(),
            ),
            ("ksweep_models", sweep.len()),
        ],
    );
    finish(config, report, BTreeMap::new(), started)
}

/// prep, fit, topics, events and report in order.
pub fn all(config: &Config) -> Result<Vec<StageReport>, PipelineError> {
    Ok(vec![
        prep(config)?,
        fit(config)?,
        topics(config)?,
        events(config)?,
        report(config)?,
    ])
}

/// Writes a synthetic corpus with ground truth into `paths.out`.
pub fn synth(config: &Config) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "synth";
    let spec = SynthSpec::from_config(config)?;
    let data = generate(&spec).map_err(|e| match e {
        crate::synth::SynthError::InvalidDimensions(m) => {
            PipelineError::Config(format!("synth: {m}"))
        }
        other => PipelineError::Invariant {
            stage: STAGE,
            message: other.to_string(),
        },
    })?;
    data.write(&config.paths.out, config).in_stage(STAGE)?;
    Ok(StageReport::new(
        STAGE,
        &[
            ("documents", spec.docs),
            ("topics", spec.k),
            ("vocabulary", spec.vocab),
            ("trading_days", data.calendar.len()),
        ],
    ))
}
