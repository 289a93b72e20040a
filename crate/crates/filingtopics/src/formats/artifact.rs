//! Intermediate artifacts written by one stage and read by the next.
//!
//! Model file layout (whitespace-separated, one record per line):
//!
//! ```text
//! K V D alpha eta seed
//! phi row 0 (V values)
//! ...                    K rows in total
//! theta row 0 (K values)
//! ...                    D rows in total
//! sweeps S B             total sweeps and burn-in
//! empty d1 d2 ...        only when some documents had no tokens
//! ```
//!
//! Values are printed as the shortest decimal that parses back to the same
//! bits, so a model survives a write/read cycle exactly.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, SecondsFormat};
use filingtopics_core::corpus::{FilterStep, YearRow};
use filingtopics_core::eventstudy::{EventStatus, SkipReason};
use filingtopics_core::relevance::TopicSummary;
use filingtopics_core::{
    DocumentTermMatrix, EventResult, FilingRecord, LdaConfig, LdaModel, Vocabulary,
};

use super::{csv_reader, num, opt_num, read_text, records, write_text, CsvOut, FormatError};

pub fn write_dtm(path: &Path, dtm: &DocumentTermMatrix) -> Result<(), FormatError> {
    let mut out = format!("{} {} {}\n", dtm.n_docs(), dtm.n_terms(), dtm.nnz());
    for (d, t, c) in dtm.triples() {
        out.push_str(&format!("{d} {t} {c}\n"));
    }
    write_text(path, &out)
}

fn fields<const N: usize>(path: &Path, line: usize, text: &str) -> Result<[u64; N], FormatError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != N {
        return Err(FormatError::parse(
            path,
            line,
            format!("expected {N} integers"),
        ));
    }
    let mut values = [0u64; N];
    for (v, p) in values.iter_mut().zip(parts) {
        *v = p
            .parse()
            .map_err(|_| FormatError::parse(path, line, format!("invalid integer {p:?}")))?;
    }
    Ok(values)
}

pub fn read_dtm(path: &Path) -> Result<DocumentTermMatrix, FormatError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| FormatError::parse(path, 1, "missing `D V NNZ` header"))?;
    let [n_docs, n_terms, nnz] = fields::<3>(path, 1, header)?;
    let mut triples = Vec::with_capacity(nnz as usize);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let [d, t, c] = fields::<3>(path, i + 1, line)?;
        let c = u32::try_from(c).map_err(|_| FormatError::parse(path, i + 1, "count too large"))?;
        triples.push((d as usize, t as usize, c));
    }
    if triples.len() as u64 != nnz {
        return Err(FormatError::invalid(
            path,
            format!("header promises {nnz} entries, found {}", triples.len()),
        ));
    }
    DocumentTermMatrix::from_triples(n_docs as usize, n_terms as usize, triples)
        .map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn write_vocabulary(path: &Path, vocabulary: &Vocabulary) -> Result<(), FormatError> {
    let mut out = String::new();
    for term in vocabulary.terms() {
        out.push_str(term);
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary, FormatError> {
    let text = read_text(path)?;
    let terms: Vec<&str> = text.lines().collect();
    let vocabulary = Vocabulary::from_terms(terms.iter().copied());
    if vocabulary
        .terms()
        .iter()
        .map(String::as_str)
        .ne(terms.iter().copied())
    {
        return Err(FormatError::invalid(
            path,
            "terms must be unique and sorted",
        ));
    }
    Ok(vocabulary)
}

/// One row of `docs.csv`: a filtered filing, in document-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRow {
    pub filing_id: String,
    pub cik: String,
    pub ticker: String,
    pub firm_name: String,
    pub filed_at: DateTime<FixedOffset>,
    pub word_count: usize,
    pub stemmed_length: u64,
}

impl DocRow {
    pub fn from_filing(f: &FilingRecord, stemmed_length: u64) -> Self {
        DocRow {
            filing_id: f.filing_id.clone(),
            cik: f.cik.clone(),
            ticker: f.ticker.clone(),
            firm_name: f.firm_name.clone(),
            filed_at: f.filed_at,
            word_count: f.word_count,
            stemmed_length,
        }
    }

    /// The filing without its text, which later stages do not need.
    pub fn to_filing(&self) -> FilingRecord {
        FilingRecord {
            filing_id: self.filing_id.clone(),
            cik: self.cik.clone(),
            ticker: self.ticker.clone(),
            firm_name: self.firm_name.clone(),
            filed_at: self.filed_at,
            text: String::new(),
            word_count: self.word_count,
        }
    }

    pub fn filed_date(&self) -> NaiveDate {
        self.filed_at.date_naive()
    }
}

const DOCS_HEADER: [&str; 7] = [
    "filing_id",
    "cik",
    "ticker",
    "firm_name",
    "filed_at",
    "word_count",
    "stemmed_length",
];

pub fn write_docs(path: &Path, docs: &[DocRow]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&DOCS_HEADER);
    for d in docs {
        out.row([
            d.filing_id.clone(),
            d.cik.clone(),
            d.ticker.clone(),
            d.firm_name.clone(),
            d.filed_at.to_rfc3339_opts(SecondsFormat::AutoSi, false),
            d.word_count.to_string(),
            d.stemmed_length.to_string(),
        ]);
    }
    out.save(path)
}

pub fn read_docs(path: &Path) -> Result<Vec<DocRow>, FormatError> {
    let mut reader = csv_reader(path, &DOCS_HEADER)?;
    records(path, &mut reader)?
        .into_iter()
        .map(|(line, r)| {
            let field = |i: usize| r.get(i).unwrap_or("");
            let int = |i: usize| {
                field(i).parse::<u64>().map_err(|_| {
                    FormatError::parse(path, line, format!("invalid {}", DOCS_HEADER[i]))
                })
            };
            Ok(DocRow {
                filing_id: field(0).to_string(),
                cik: field(1).to_string(),
                ticker: field(2).to_string(),
                firm_name: field(3).to_string(),
                filed_at: DateTime::parse_from_rfc3339(field(4))
                    .map_err(|_| FormatError::parse(path, line, "invalid filed_at"))?,
                word_count: int(5)? as usize,
                stemmed_length: int(6)?,
            })
        })
        .collect()
}

pub fn write_model(path: &Path, model: &LdaModel) -> Result<(), FormatError> {
    let c = model.config();
    let mut out = format!(
        "{} {} {} {} {} {}\n",
        c.k,
        model.n_terms(),
        model.n_docs(),
        num(c.alpha),
        num(c.eta),
        c.seed
    );
    let row = |values: &[f64]| values.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ") + "\n";
    for t in 0..c.k {
        out.push_str(&row(model.phi_row(t)));
    }
    for d in 0..model.n_docs() {
        out.push_str(&row(model.theta_row(d)));
    }
    out.push_str(&format!("sweeps {} {}\n", c.sweeps, c.burn_in));
    if !model.empty_docs().is_empty() {
        let ids: Vec<String> = model.empty_docs().iter().map(usize::to_string).collect();
        out.push_str(&format!("empty {}\n", ids.join(" ")));
    }
    write_text(path, &out)
}

pub fn read_model(path: &Path) -> Result<LdaModel, FormatError> {
    let text = read_text(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let header: Vec<&str> = lines
        .first()
        .map(|l| l.split_whitespace().collect())
        .unwrap_or_default();
    if header.len() != 6 {
        return Err(FormatError::parse(
            path,
            1,
            "expected header `K V D alpha eta seed`",
        ));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| FormatError::parse(path, 1, format!("invalid integer {s:?}")))
    };
    let float = |line: usize, s: &str| {
        s.parse::<f64>()
            .map_err(|_| FormatError::parse(path, line, format!("invalid number {s:?}")))
    };
    let (k, v, d) = (int(header[0])?, int(header[1])?, int(header[2])?);
    let (alpha, eta) = (float(1, header[3])?, float(1, header[4])?);
    let seed = header[5]
        .parse::<u64>()
        .map_err(|_| FormatError::parse(path, 1, "invalid seed"))?;
    if lines.len() < 1 + k + d {
        return Err(FormatError::invalid(
            path,
            format!("expected {} matrix rows", k + d),
        ));
    }
    let read_rows = |first: usize, count: usize, width: usize| -> Result<Vec<f64>, FormatError> {
        let mut values = Vec::with_capacity(count * width);
        for (i, line) in lines.iter().enumerate().skip(first).take(count) {
            let before = values.len();
            for s in line.split_whitespace() {
                values.push(float(i + 1, s)?);
            }
            if values.len() - before != width {
                return Err(FormatError::parse(
                    path,
                    i + 1,
                    format!("expected {width} values"),
                ));
            }
        }
        Ok(values)
    };
    let phi = read_rows(1, k, v)?;
    let theta = read_rows(1 + k, d, k)?;
    let (mut sweeps, mut burn_in, mut empty) = (0, 0, Vec::new());
    for (i, line) in lines.iter().enumerate().skip(1 + k + d) {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("sweeps") => {
                let rest: Vec<&str> = parts.collect();
                if rest.len() != 2 {
                    return Err(FormatError::parse(path, i + 1, "expected `sweeps S B`"));
                }
                sweeps = int(rest[0])?;
                burn_in = int(rest[1])?;
            }
            Some("empty") => {
                for s in parts {
                    empty.push(int(s)?);
                }
            }
            None => {}
            Some(other) => {
                return Err(FormatError::parse(
                    path,
                    i + 1,
                    format!("unexpected record {other:?}"),
                ));
            }
        }
    }
    let config = LdaConfig {
        k,
        alpha,
        eta,
        sweeps,
        burn_in,
        seed,
    };
    LdaModel::from_parts(config, v, d, phi, theta, empty)
        .map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn write_trace(path: &Path, trace: &[(usize, f64)]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&["sweep", "log_likelihood"]);
    for &(sweep, ll) in trace {
        out.row([sweep.to_string(), num(ll)]);
    }
    out.save(path)
}

const EVENTS_HEADER: [&str; 5] = [
    "filing_id",
    "ticker",
    "event_date",
    "abnormal_return",
    "status",
];

pub fn write_events(path: &Path, events: &[EventResult]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&EVENTS_HEADER);
    for e in events {
        out.row([
            e.filing_id.clone(),
            e.ticker.clone(),
            e.event_date.map(|d| d.to_string()).unwrap_or_default(),
            opt_num(e.abnormal_return),
            match e.status {
                EventStatus::Ok => "ok".to_string(),
                EventStatus::Skipped(reason) => reason.as_str().to_string(),
            },
        ]);
    }
    out.save(path)
}

pub fn read_events(path: &Path) -> Result<Vec<EventResult>, FormatError> {
    let mut reader = csv_reader(path, &EVENTS_HEADER)?;
    records(path, &mut reader)?
        .into_iter()
        .map(|(line, r)| {
            let field = |i: usize| r.get(i).unwrap_or("");
            let bad = |what: &str| FormatError::parse(path, line, format!("invalid {what}"));
            let event_date = match field(2) {
                "" => None,
                s => Some(NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad("event_date"))?),
            };
            let abnormal_return = match field(3) {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|_| bad("abnormal_return"))?),
            };
            let status = match field(4) {
                "ok" => EventStatus::Ok,
                s => EventStatus::Skipped(SkipReason::parse(s).ok_or_else(|| bad("status"))?),
            };
            if (status == EventStatus::Ok) != abnormal_return.is_some() {
                return Err(bad(
                    "row: abnormal_return must be present exactly when status is ok",
                ));
            }
            Ok(EventResult {
                filing_id: field(0).to_string(),
                ticker: field(1).to_string(),
                event_date,
                abnormal_return,
                status,
            })
        })
        .collect()
}

pub fn write_provenance(path: &Path, steps: &[FilterStep], kept: usize) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&["filter", "removed"]);
    for s in steps {
        out.row([s.name.clone(), s.removed.to_string()]);
    }
    out.row(["kept".to_string(), kept.to_string()]);
    out.save(path)
}

pub fn write_corpus_years(path: &Path, years: &[YearRow]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&[
        "year",
        "total_filings",
        "covered_firms",
        "mean_stemmed_length",
    ]);
    for y in years {
        out.row([
            y.year.to_string(),
            y.total_filings.to_string(),
            y.covered_firms.to_string(),
            num(y.mean_stemmed_length),
        ]);
    }
    out.save(path)
}

pub fn write_topics(path: &Path, topics: &[TopicSummary]) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(topics).expect("topic summaries serialize");
    write_text(path, &(json + "\n"))
}

/// `filing_id,topic`; empty documents get an empty topic cell.
pub fn write_assignments(
    path: &Path,
    docs: &[DocRow],
    topics: &[Option<usize>],
) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&["filing_id", "topic"]);
    for (d, t) in docs.iter().zip(topics) {
        out.row([
            d.filing_id.clone(),
            t.map(|t| t.to_string()).unwrap_or_default(),
        ]);
    }
    out.save(path)
}

/// Maps filing ids to topics for the documents that have one.
pub fn assignment_map(docs: &[DocRow], topics: &[Option<usize>]) -> BTreeMap<String, usize> {
    docs.iter()
        .zip(topics)
        .filter_map(|(d, t)| t.map(|t| (d.filing_id.clone(), t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use filingtopics_core::lda::fit_lda;

    fn dtm() -> DocumentTermMatrix {
        DocumentTermMatrix::from_triples(3, 3, [(0, 0, 2), (0, 1, 1), (2, 2, 4), (2, 0, 1)])
            .unwrap()
    }

    #[test]
    fn dtm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dtm.txt");
        write_dtm(&path, &dtm()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("3 3 4\n0 0 2\n"));
        assert_eq!(read_dtm(&path).unwrap(), dtm());
        std::fs::write(&path, "3 3 5\n0 0 2\n").unwrap();
        assert!(read_dtm(&path).is_err());
    }

    #[test]
    fn model_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let config = LdaConfig {
            sweeps: 30,
            burn_in: 5,
            seed: 3,
            ..LdaConfig::new(2)
        };
        let model = fit_lda(&dtm(), &config).unwrap();
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.config(), model.config());
        assert_eq!(back.empty_docs(), &[1]);
        let bits = |m: &LdaModel| {
            m.phi()
                .iter()
                .chain(m.theta())
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&model));
        write_model(&path, &back).unwrap();
        assert_eq!(read_model(&path).unwrap(), back);
    }

    #[test]
    fn events_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        let events = vec![
            EventResult {
                filing_id: "a".into(),
                ticker: "AAA".into(),
                event_date: NaiveDate::from_ymd_opt(2006, 5, 1),
                abnormal_return: Some(-0.1 + 0.2),
                status: EventStatus::Ok,
            },
            EventResult {
                filing_id: "b".into(),
                ticker: "BBB".into(),
                event_date: None,
                abnormal_return: None,
                status: EventStatus::Skipped(SkipReason::NoCalendar),
            },
        ];
        write_events(&path, &events).unwrap();
        assert_eq!(read_events(&path).unwrap(), events);
    }

    #[test]
    fn docs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.csv");
        let filed_at = DateTime::parse_from_rfc3339("2006-03-01T17:05:00-04:00").unwrap();
        let docs = vec![DocRow {
            filing_id: "x".into(),
            cik: "0001".into(),
            ticker: "XX".into(),
            firm_name: "X, Inc.".into(),
            filed_at,
            word_count: 12,
            stemmed_length: 7,
        }];
        write_docs(&path, &docs).unwrap();
        assert_eq!(read_docs(&path).unwrap(), docs);
    }
}
