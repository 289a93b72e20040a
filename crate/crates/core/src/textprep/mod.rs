//! Raw text to document-term matrix: tokenize, drop stop words, Porter-stem,
//! count, and prune stems that are too rare across the corpus.

mod porter;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use porter::stem;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("no terms survive min-df pruning")]
    EmptyVocabulary,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("min_doc_frequency must lie in [0, 1], got {0}")]
    InvalidMinDf(f64),
}

/// Options for [`build_dtm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepOptions {
    /// Keep a stem iff it occurs in at least this fraction of documents.
    pub min_doc_frequency: f64,
    /// Tokens with fewer characters are discarded. 0 or 1 disables the rule.
    pub min_token_len: usize,
}

impl Default for PrepOptions {
    fn default() -> Self {
        PrepOptions {
            min_doc_frequency: 0.05,
            min_token_len: 3,
        }
    }
}

/// Lowercases, splits on every non-alphabetic character and drops tokens
/// shorter than three characters.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, PrepOptions::default().min_token_len)
}

pub fn tokenize_with(text: &str, min_token_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty() && t.chars().count() >= min_token_len)
        .map(|t| t.to_lowercase())
        .collect()
}

/// A set of lowercase stop words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    /// The bundled 174-word English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// Parses one word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.to_lowercase())
            .collect();
        StopwordList { words }
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        Self::english()
    }
}

/// Order-preserving removal of exact stop-word matches.
pub fn remove_stopwords(tokens: Vec<String>, stopwords: &StopwordList) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Stems ordered lexicographically; a stem's id is its position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from any collection of terms. Duplicates collapse.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        let terms: Vec<String> = set.into_iter().collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { terms, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Sparse document × term count matrix.
///
/// Rows are stored as `(term, count)` pairs sorted by term id. Documents left
/// with no tokens after pruning stay in place as empty rows and are reported
/// by [`DocumentTermMatrix::is_empty_doc`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTermMatrix {
    n_terms: usize,
    rows: Vec<Vec<(u32, u32)>>,
    doc_lengths: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DtmError {
    #[error("entry ({doc}, {term}) lies outside a {n_docs}x{n_terms} matrix")]
    OutOfRange {
        doc: usize,
        term: usize,
        n_docs: usize,
        n_terms: usize,
    },
    #[error("entry ({doc}, {term}) has a zero count")]
    ZeroCount { doc: usize, term: usize },
    #[error("entry ({doc}, {term}) appears twice")]
    Duplicate { doc: usize, term: usize },
    #[error("term {0} has no nonzero entry")]
    OrphanTerm(usize),
}

impl DocumentTermMatrix {
    /// Assembles a matrix from `(doc, term, count)` triples in any order.
    pub fn from_triples<I>(n_docs: usize, n_terms: usize, triples: I) -> Result<Self, DtmError>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut rows: Vec<Vec<(u32, u32)>> = (0..n_docs).map(|_| Vec::new()).collect();
        let mut seen = alloc::vec![false; n_terms];
        for (doc, term, count) in triples {
            if doc >= n_docs || term >= n_terms {
                return Err(DtmError::OutOfRange {
                    doc,
                    term,
                    n_docs,
                    n_terms,
                });
            }
            if count == 0 {
                return Err(DtmError::ZeroCount { doc, term });
            }
            rows[doc].push((term as u32, count));
            seen[term] = true;
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(DtmError::OrphanTerm(orphan));
        }
        for (doc, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(DtmError::Duplicate {
                    doc,
                    term: w[0].0 as usize,
                });
            }
        }
        let doc_lengths = rows
            .iter()
            .map(|r| r.iter().map(|&(_, c)| u64::from(c)).sum())
            .collect();
        Ok(DocumentTermMatrix {
            n_terms,
            rows,
            doc_lengths,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Sparse row `d` as `(term, count)` pairs in term order.
    pub fn row(&self, d: usize) -> &[(u32, u32)] {
        &self.rows[d]
    }

    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_lengths.iter().sum()
    }

    pub fn is_empty_doc(&self, d: usize) -> bool {
        self.doc_lengths[d] == 0
    }

    pub fn empty_docs(&self) -> Vec<usize> {
        (0..self.n_docs())
            .filter(|&d| self.is_empty_doc(d))
            .collect()
    }

    /// `(doc, term, count)` triples in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(d, row)| row.iter().map(move |&(t, c)| (d, t as usize, c)))
    }

    /// Corpus-wide count per term.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut totals = alloc::vec![0u64; self.n_terms];
        for (_, t, c) in self.triples() {
            totals[t] += u64::from(c);
        }
        totals
    }
}

/// Output of [`build_dtm`].
#[derive(Debug, Clone, PartialEq)]
pub struct DtmBuild {
    pub dtm: DocumentTermMatrix,
    pub vocabulary: Vocabulary,
    /// Per-document stem count after stop-word removal, before min-df pruning.
    pub stemmed_lengths: Vec<u64>,
}

/// Tokenize → remove stop words → stem for one document.
pub fn preprocess(text: &str, stopwords: &StopwordList, options: &PrepOptions) -> Vec<String> {
    tokenize_with(text, options.min_token_len)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .map(|t| stem(&t))
        .collect()
}

/// Builds the pruned document-term matrix for a sequence of document texts.
pub fn build_dtm<'a, I>(
    texts: I,
    stopwords: &StopwordList,
    options: &PrepOptions,
) -> Result<DtmBuild, TextError>
where
    I: IntoIterator<Item = &'a str>,
{
    if !(0.0..=1.0).contains(&options.min_doc_frequency) {
        return Err(TextError::InvalidMinDf(options.min_doc_frequency));
    }
    let docs: Vec<BTreeMap<String, u32>> = texts
        .into_iter()
        .map(|text| {
            let mut counts = BTreeMap::new();
            for s in preprocess(text, stopwords, options) {
                *counts.entry(s).or_insert(0u32) += 1;
            }
            counts
        })
        .collect();
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let n_docs = docs.len();

    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in &docs {
        for term in counts.keys() {
            *doc_freq.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let kept = doc_freq
        .iter()
        .filter(|(_, &df)| df as f64 / n_docs as f64 >= options.min_doc_frequency)
        .map(|(t, _)| t.to_string());
    let vocabulary = Vocabulary::from_terms(kept);
    if vocabulary.is_empty() {
        return Err(TextError::EmptyVocabulary);
    }

    let stemmed_lengths = docs
        .iter()
        .map(|c| c.values().map(|&n| u64::from(n)).sum())
        .collect();
    let triples = docs.iter().enumerate().flat_map(|(d, counts)| {
        let vocabulary = &vocabulary;
        counts
            .iter()
            .filter_map(move |(term, &n)| vocabulary.id(term).map(|id| (d, id, n)))
    });
    let dtm = DocumentTermMatrix::from_triples(n_docs, vocabulary.len(), triples)
        .expect("counts built from a consistent vocabulary");
    Ok(DtmBuild {
        dtm,
        vocabulary,
        stemmed_lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Earnings rose 5%!"),
            strings(&["earnings", "rose"])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("THE The the"), strings(&["the", "the", "the"]));
        assert_eq!(tokenize("2004 10-K re-filed"), strings(&["filed"]));
        assert_eq!(tokenize_with("a to be", 0), strings(&["a", "to", "be"]));
    }

    #[test]
    fn stopword_removal() {
        let list = StopwordList::english();
        assert_eq!(list.len(), 174);
        assert!(list.iter().all(|w| w == w.to_lowercase()));
        assert_eq!(
            remove_stopwords(strings(&["the", "market", "is", "strong"]), &list),
            strings(&["market", "strong"])
        );
        assert!(remove_stopwords(vec![], &list).is_empty());
        let plain = strings(&["market", "strong"]);
        assert_eq!(remove_stopwords(plain.clone(), &list), plain);
    }

    #[test]
    fn stopword_file_parsing() {
        let list = StopwordList::parse("# header\nFoo\n\nbar # trailing\n");
        assert_eq!(list.len(), 2);
        assert!(list.contains("foo") && list.contains("bar"));
    }

    fn dense(dtm: &DocumentTermMatrix) -> Vec<Vec<u32>> {
        let mut m = vec![vec![0; dtm.n_terms()]; dtm.n_docs()];
        for (d, t, c) in dtm.triples() {
            m[d][t] = c;
        }
        m
    }

    #[test]
    fn two_document_matrix() {
        let docs = ["the market rose", "market fell"];
        let opts = PrepOptions {
            min_doc_frequency: 0.0,
            ..PrepOptions::default()
        };
        let built = build_dtm(docs, &StopwordList::english(), &opts).unwrap();
        assert_eq!(
            built.vocabulary.terms(),
            &strings(&["fell", "market", "rose"])[..]
        );
        assert_eq!(dense(&built.dtm), vec![vec![0, 1, 1], vec![1, 1, 0]]);
        assert_eq!(built.dtm.doc_lengths(), &[2, 2]);

        let opts = PrepOptions {
            min_doc_frequency: 1.0,
            ..PrepOptions::default()
        };
        let built = build_dtm(docs, &StopwordList::english(), &opts).unwrap();
        assert_eq!(built.vocabulary.terms(), &strings(&["market"])[..]);
        assert_eq!(dense(&built.dtm), vec![vec![1], vec![1]]);
        assert_eq!(built.stemmed_lengths, vec![2, 2]);
    }

    #[test]
    fn pruned_documents_become_empty_rows() {
        let docs = ["market market", "market", "solitary"];
        let opts = PrepOptions {
            min_doc_frequency: 0.5,
            ..PrepOptions::default()
        };
        let built = build_dtm(docs, &StopwordList::english(), &opts).unwrap();
        assert_eq!(built.dtm.n_docs(), 3);
        assert_eq!(built.dtm.empty_docs(), vec![2]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let err = build_dtm(
            ["the of is"],
            &StopwordList::english(),
            &PrepOptions::default(),
        );
        assert_eq!(err.unwrap_err(), TextError::EmptyVocabulary);
        let none: [&str; 0] = [];
        assert_eq!(
            build_dtm(none, &StopwordList::english(), &PrepOptions::default()).unwrap_err(),
            TextError::EmptyCorpus
        );
    }

    #[test]
    fn triples_validation() {
        assert_eq!(
            DocumentTermMatrix::from_triples(1, 2, [(0, 0, 1)]).unwrap_err(),
            DtmError::OrphanTerm(1)
        );
        assert!(matches!(
            DocumentTermMatrix::from_triples(1, 1, [(0, 0, 1), (0, 0, 2)]),
            Err(DtmError::Duplicate { .. })
        ));
        assert!(matches!(
            DocumentTermMatrix::from_triples(1, 1, [(0, 0, 0)]),
            Err(DtmError::ZeroCount { .. })
        ));
    }
}
