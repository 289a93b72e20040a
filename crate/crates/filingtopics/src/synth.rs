//! Synthetic corpora with known topics and known announcement effects.
//!
//! Topic-word rows φ* are drawn from Dirichlet(η) and document mixtures θ*
//! from Dirichlet(α); every token picks a topic from θ*_d and a word from that
//! topic's row. Each filing belongs to its own firm, whose price is a
//! power-of-two multiple of the market index. Scaling by a power of two is
//! exact in binary floating point, so outside the event day the stock's
//! returns equal the market's bit for bit and the market model fits α = 0,
//! β = 1 exactly. On the event day the price carries the shock assigned to the
//! filing's dominant topic.

use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, FixedOffset, NaiveDate, NaiveTime, SecondsFormat, TimeZone, Weekday};
use filingtopics_core::eventstudy::event_date_for;
use filingtopics_core::textprep::{stem, StopwordList};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Normal};
use thiserror::Error;

use crate::config::Config;
use crate::formats::{num, write_text, CsvOut, FormatError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic dimensions: {0}")]
    InvalidDimensions(String),
    #[error("synthetic data is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub k: usize,
    pub docs: usize,
    pub vocab: usize,
    pub doc_len: usize,
    pub alpha: f64,
    pub eta: f64,
    /// Abnormal return in percent for filings whose dominant topic is the
    /// index; topics past the end get 0.
    pub shocks: Vec<f64>,
    pub seed: u64,
    pub est_len: usize,
    pub gap: usize,
    pub days_after: usize,
    pub market_close: NaiveTime,
}

impl SynthSpec {
    pub fn from_config(config: &Config) -> Result<Self, crate::error::PipelineError> {
        let s = &config.synth;
        let events = config.event_config()?;
        Ok(SynthSpec {
            k: s.k,
            docs: s.docs,
            vocab: s.vocab,
            doc_len: s.doc_len,
            alpha: s.alpha,
            eta: s.eta,
            shocks: s.shocks.clone(),
            seed: config.seed,
            est_len: events.est_len,
            gap: events.gap,
            days_after: s.days_after,
            market_close: events.market_close,
        })
    }

    pub fn shock(&self, topic: usize) -> f64 {
        self.shocks.get(topic).copied().unwrap_or(0.0)
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidDimensions(m));
        if self.k == 0 || self.docs == 0 {
            return bad(format!(
                "need K >= 1 and D >= 1, got K = {} and D = {}",
                self.k, self.docs
            ));
        }
        if self.vocab < self.k {
            return bad(format!(
                "need V >= K, got V = {} and K = {}",
                self.vocab, self.k
            ));
        }
        if self.doc_len == 0 {
            return bad("doc_len must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.eta > 0.0 && self.alpha.is_finite() && self.eta.is_finite()) {
            return bad("alpha and eta must be positive".into());
        }
        if self.days_after == 0 {
            return bad("days_after must be at least 1".into());
        }
        if self.shocks.iter().any(|s| !(s.is_finite() && *s > -100.0)) {
            return bad("shocks must be finite and above -100%".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFiling {
    pub filing_id: String,
    pub cik: String,
    pub ticker: String,
    pub firm_name: String,
    pub filed_at: chrono::DateTime<FixedOffset>,
    /// Index of the event day in the calendar.
    pub event_index: usize,
    pub dominant_topic: usize,
    pub shock: f64,
    /// Stock price divided by the index level.
    pub scale: f64,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub spec: SynthSpec,
    pub words: Vec<String>,
    /// K × V, row-major.
    pub phi: Vec<f64>,
    /// D × K, row-major, in filing order.
    pub theta: Vec<f64>,
    /// Word ids per document.
    pub documents: Vec<Vec<usize>>,
    pub filings: Vec<SynthFiling>,
    pub calendar: Vec<NaiveDate>,
    pub market: Vec<f64>,
}

fn dirichlet(rng: &mut ChaCha8Rng, concentration: f64, n: usize) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Pronounceable letter strings that the stemmer leaves alone and that are
/// not stop words, so each survives preprocessing as its own stem.
fn pseudo_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    const CONSONANTS: &[u8] = b"bcdfgklmnprtvz";
    const VOWELS: &[u8] = b"aeiou";
    let stopwords = StopwordList::english();
    let mut words = Vec::with_capacity(n);
    let mut seen = std::collections::BTreeSet::new();
    while words.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[rng.random_range(0..VOWELS.len())] as char);
        }
        w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
        if stem(&w) == w && !stopwords.contains(&w) && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

fn weekdays_from(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut days = Vec::with_capacity(n);
    let mut d = start;
    while days.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            days.push(d);
        }
        d = d + Days::new(1);
    }
    days
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, v) = (spec.k, spec.vocab);

    let words = pseudo_words(&mut rng, v);
    let phi: Vec<f64> = (0..k)
        .flat_map(|_| dirichlet(&mut rng, spec.eta, v))
        .collect();
    let theta: Vec<f64> = (0..spec.docs)
        .flat_map(|_| dirichlet(&mut rng, spec.alpha, k))
        .collect();

    let word_dists: Vec<WeightedIndex<f64>> = phi
        .chunks(v)
        .map(|row| WeightedIndex::new(row).expect("normalized row"))
        .collect();
    let documents: Vec<Vec<usize>> = theta
        .chunks(k)
        .map(|row| {
            let topics = WeightedIndex::new(row).expect("normalized row");
            (0..spec.doc_len)
                .map(|_| word_dists[topics.sample(&mut rng)].sample(&mut rng))
                .collect()
        })
        .collect();

    let first_event = spec.est_len + spec.gap + 1;
    let n_days = first_event + spec.days_after + 1;
    let calendar = weekdays_from(
        NaiveDate::from_ymd_opt(2004, 1, 5).expect("valid date"),
        n_days,
    );
    let noise = Normal::new(0.0003, 0.01).expect("valid normal");
    let mut level = 100.0;
    let market: Vec<f64> = (0..n_days)
        .map(|i| {
            if i > 0 {
                level *= 1.0 + noise.sample(&mut rng);
            }
            level
        })
        .collect();

    let close_minutes = (spec
        .market_close
        .signed_duration_since(NaiveTime::MIN)
        .num_minutes())
    .clamp(1, 1439);
    let mut filings = Vec::with_capacity(spec.docs);
    for (i, doc) in documents.iter().enumerate() {
        let e = rng.random_range(first_event..n_days - 1);
        let offset = FixedOffset::west_opt(if rng.random_bool(0.5) {
            5 * 3600
        } else {
            4 * 3600
        })
        .expect("valid offset");
        let gap_days: Vec<NaiveDate> = calendar[e - 1]
            .iter_days()
            .skip(1)
            .take_while(|d| *d < calendar[e])
            .collect();
        let (date, minute) = match rng.random_range(0..3) {
            1 => (calendar[e - 1], rng.random_range(close_minutes..1440)),
            2 if !gap_days.is_empty() => (
                gap_days[rng.random_range(0..gap_days.len())],
                rng.random_range(0..1440),
            ),
            _ => (
                calendar[e],
                rng.random_range(close_minutes.min(570).min(close_minutes - 1)..close_minutes),
            ),
        };
        let time = NaiveTime::from_num_seconds_from_midnight_opt(minute as u32 * 60, 0)
            .expect("valid time");
        let filed_at = offset
            .from_local_datetime(&date.and_time(time))
            .single()
            .expect("fixed offsets are unambiguous");
        match event_date_for(&filed_at, &calendar, spec.market_close) {
            Ok(d) if d == calendar[e] => {}
            other => {
                return Err(SynthError::Inconsistent(format!(
                    "filing {i} at {filed_at} maps to {other:?}, expected {}",
                    calendar[e]
                )))
            }
        }
        let dominant_topic = argmax(&theta[i * k..(i + 1) * k]);
        let scale = 2f64.powi(rng.random_range(-1..=2));
        let mut text = String::new();
        for (j, &w) in doc.iter().enumerate() {
            if j > 0 {
                text.push(if j % 12 == 0 { '\n' } else { ' ' });
            }
            text.push_str(&words[w]);
        }
        text.push('\n');
        filings.push(SynthFiling {
            filing_id: format!("SYN{:05}", i + 1),
            cik: format!("{:010}", 900_000 + i + 1),
            ticker: format!("S{:05}", i + 1),
            firm_name: format!("Synthetic Firm {}", i + 1),
            filed_at,
            event_index: e,
            dominant_topic,
            shock: spec.shock(dominant_topic),
            scale,
            text,
        });
    }

    Ok(SynthData {
        spec: spec.clone(),
        words,
        phi,
        theta,
        documents,
        filings,
        calendar,
        market,
    })
}

impl SynthData {
    /// Closes of filing `i`'s stock around its estimation and event windows.
    pub fn stock_prices(&self, i: usize) -> Vec<(NaiveDate, f64)> {
        let f = &self.filings[i];
        let e = f.event_index;
        let lo = e.saturating_sub(self.spec.gap + self.spec.est_len + 1);
        let hi = (e + 2).min(self.calendar.len() - 1);
        (lo..=hi)
            .map(|t| {
                let price = if t == e && f.shock != 0.0 {
                    let m = &self.market;
                    let r_market = m[e] / m[e - 1] - 1.0;
                    f.scale * m[e - 1] * (1.0 + r_market + f.shock / 100.0)
                } else {
                    f.scale * self.market[t]
                };
                (self.calendar[t], price)
            })
            .collect()
    }

    pub fn event_date(&self, i: usize) -> NaiveDate {
        self.calendar[self.filings[i].event_index]
    }

    /// Writes the corpus, prices, ground truth and a runnable `config.toml`
    /// whose other settings come from `base`.
    pub fn write(&self, dir: &Path, base: &Config) -> Result<(), FormatError> {
        let mut meta = CsvOut::new(&crate::formats::input::METADATA_HEADER);
        for f in &self.filings {
            let rel = format!("texts/{}.txt", f.filing_id);
            write_text(&dir.join(&rel), &f.text)?;
            meta.row([
                f.filing_id.clone(),
                f.cik.clone(),
                f.ticker.clone(),
                f.firm_name.clone(),
                f.filed_at.to_rfc3339_opts(SecondsFormat::Secs, false),
                rel,
            ]);
        }
        meta.save(&dir.join("metadata.csv"))?;

        let mut prices = CsvOut::new(&crate::formats::input::PRICES_HEADER);
        for (i, f) in self.filings.iter().enumerate() {
            for (date, p) in self.stock_prices(i) {
                prices.row([date.to_string(), f.ticker.clone(), num(p)]);
            }
        }
        prices.save(&dir.join("prices.csv"))?;

        let mut market = CsvOut::new(&crate::formats::input::MARKET_HEADER);
        for (date, level) in self.calendar.iter().zip(&self.market) {
            market.row([date.to_string(), num(*level)]);
        }
        market.save(&dir.join("market.csv"))?;

        let matrix = |values: &[f64], width: usize| {
            values
                .chunks(width)
                .map(|row| row.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ") + "\n")
                .collect::<String>()
        };
        let truth = dir.join("truth");
        write_text(&truth.join("words.txt"), &(self.words.join("\n") + "\n"))?;
        write_text(&truth.join("phi.txt"), &matrix(&self.phi, self.spec.vocab))?;
        write_text(&truth.join("theta.txt"), &matrix(&self.theta, self.spec.k))?;
        let mut shocks = CsvOut::new(&[
            "filing_id",
            "ticker",
            "event_date",
            "dominant_topic",
            "shock",
        ]);
        for (i, f) in self.filings.iter().enumerate() {
            shocks.row([
                f.filing_id.clone(),
                f.ticker.clone(),
                self.event_date(i).to_string(),
                f.dominant_topic.to_string(),
                num(f.shock),
            ]);
        }
        shocks.save(&truth.join("shocks.csv"))?;

        let config = self.run_config(base);
        let text = toml::to_string(&config).expect("config serializes");
        write_text(&dir.join("config.toml"), &text)
    }

    /// The configuration that runs the pipeline on the written files.
    pub fn run_config(&self, base: &Config) -> Config {
        let mut config = base.clone();
        config.seed = self.spec.seed;
        config.paths.metadata = Some(PathBuf::from("metadata.csv"));
        config.paths.text_root = PathBuf::from(".");
        config.paths.prices = Some(PathBuf::from("prices.csv"));
        config.paths.market = Some(PathBuf::from("market.csv"));
        config.paths.stopwords = None;
        config.paths.labels = None;
        config.paths.out = PathBuf::from("results");
        config.lda.k = self.spec.k;
        config.corpus.min_words = config.corpus.min_words.min(self.spec.doc_len);
        config.events.est_len = self.spec.est_len;
        config.events.gap = self.spec.gap;
        config.events.min_obs = config.events.min_obs.min(self.spec.est_len);
        config.events.market_close = self.spec.market_close.format("%H:%M").to_string();
        config
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Mean cosine similarity after greedily pairing each true topic with a
/// recovered one, most similar pairs first. Both matrices are K × V over the
/// same word order.
pub fn matched_similarity(truth: &[f64], recovered: &[f64], k: usize, v: usize) -> f64 {
    let mut pairs: Vec<(f64, usize, usize)> = (0..k)
        .flat_map(|i| {
            (0..k).map(move |j| {
                (
                    cosine(&truth[i * v..(i + 1) * v], &recovered[j * v..(j + 1) * v]),
                    i,
                    j,
                )
            })
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_t, mut used_r) = (vec![false; k], vec![false; k]);
    let mut total = 0.0;
    for (s, i, j) in pairs {
        if !used_t[i] && !used_r[j] {
            used_t[i] = true;
            used_r[j] = true;
            total += s;
        }
    }
    total / k as f64
}

/// K Dirichlet(`concentration`) rows over V words, as a chance baseline.
pub fn random_phi(k: usize, v: usize, concentration: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .flat_map(|_| dirichlet(&mut rng, concentration, v))
        .collect()
}
