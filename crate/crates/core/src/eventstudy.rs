//! Market-model event study: one-day abnormal returns around filings.
//!
//! For each filing the normal return is estimated by OLS of the stock's daily
//! simple returns on the market index over an estimation window that closes
//! `gap` trading days before the event day. The abnormal return on the event
//! day is the observed return minus `α̂ + β̂·R_market`, reported in percent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error, PartialEq)]
pub enum PriceError {
    #[error("{ticker}: dates must be strictly increasing (at {date})")]
    UnorderedDates { ticker: String, date: NaiveDate },
    #[error("{ticker}: price on {date} must be positive and finite")]
    InvalidPrice { ticker: String, date: NaiveDate },
    #[error("{ticker}: at least two observations are needed for returns")]
    TooShort { ticker: String },
}

/// Date-ordered adjusted closes for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(
        ticker: impl Into<String>,
        observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, PriceError> {
        let ticker = ticker.into();
        for (i, &(date, price)) in observations.iter().enumerate() {
            if !(price > 0.0 && price.is_finite()) {
                return Err(PriceError::InvalidPrice { ticker, date });
            }
            if i > 0 && observations[i - 1].0 >= date {
                return Err(PriceError::UnorderedDates { ticker, date });
            }
        }
        Ok(PriceSeries {
            ticker,
            observations,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.observations.iter().map(|&(d, _)| d)
    }

    /// Last close on or before `date`.
    pub fn close_on_or_before(&self, date: NaiveDate) -> Option<f64> {
        let idx = self.observations.partition_point(|&(d, _)| d <= date);
        idx.checked_sub(1).map(|i| self.observations[i].1)
    }
}

/// Price series keyed by ticker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceStore {
    series: BTreeMap<String, PriceSeries>,
}

impl PriceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, series: PriceSeries) {
        self.series.insert(series.ticker.clone(), series);
    }

    pub fn get(&self, ticker: &str) -> Option<&PriceSeries> {
        self.series.get(ticker)
    }

    pub fn close_on_or_before(&self, ticker: &str, date: NaiveDate) -> Option<f64> {
        self.get(ticker)?.close_on_or_before(date)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PriceSeries> {
        self.series.values()
    }
}

impl FromIterator<PriceSeries> for PriceStore {
    fn from_iter<I: IntoIterator<Item = PriceSeries>>(iter: I) -> Self {
        let mut store = PriceStore::new();
        for s in iter {
            store.insert(s);
        }
        store
    }
}

/// Date-ordered simple returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Returns {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl Returns {
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }
}

/// R_t = P_t / P_{t−1} − 1, dated at t.
pub fn simple_returns(series: &PriceSeries) -> Result<Returns, PriceError> {
    if series.observations.len() < 2 {
        return Err(PriceError::TooShort {
            ticker: series.ticker.clone(),
        });
    }
    let (dates, values) = series
        .observations
        .windows(2)
        .map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0))
        .unzip();
    Ok(Returns { dates, values })
}

/// Why a filing produced no abnormal return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Error)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    #[error("insufficient_history")]
    InsufficientHistory,
    #[error("degenerate_market")]
    DegenerateMarket,
    #[error("no_calendar")]
    NoCalendar,
    #[error("missing_price")]
    MissingPrice,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::InsufficientHistory => "insufficient_history",
            SkipReason::DegenerateMarket => "degenerate_market",
            SkipReason::NoCalendar => "no_calendar",
            SkipReason::MissingPrice => "missing_price",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SkipReason::InsufficientHistory,
            SkipReason::DegenerateMarket,
            SkipReason::NoCalendar,
            SkipReason::MissingPrice,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketModelFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub residual_std: f64,
    pub n_obs: usize,
}

/// OLS of stock on market returns over the dates both series share inside
/// `window` (inclusive). Needs at least `max(min_obs, 3)` paired days.
pub fn estimate_market_model(
    stock: &Returns,
    market: &Returns,
    window: (NaiveDate, NaiveDate),
    min_obs: usize,
) -> Result<MarketModelFit, SkipReason> {
    let (start, end) = window;
    let pairs: Vec<(f64, f64)> = stock
        .iter()
        .filter(|&(d, _)| d >= start && d <= end)
        .filter_map(|(d, s)| market.get(d).map(|m| (m, s)))
        .collect();
    let n = pairs.len();
    if n < min_obs.max(3) {
        return Err(SkipReason::InsufficientHistory);
    }
    let nf = n as f64;
    let mean_m = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_s = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(m, s) in &pairs {
        sxx += (m - mean_m) * (m - mean_m);
        sxy += (m - mean_m) * (s - mean_s);
    }
    if sxx == 0.0 {
        return Err(SkipReason::DegenerateMarket);
    }
    let beta_hat = sxy / sxx;
    let alpha_hat = mean_s - beta_hat * mean_m;
    let ssr: f64 = pairs
        .iter()
        .map(|&(m, s)| {
            let e = s - alpha_hat - beta_hat * m;
            e * e
        })
        .sum();
    Ok(MarketModelFit {
        alpha_hat,
        beta_hat,
        residual_std: libm::sqrt(ssr / (nf - 2.0)),
        n_obs: n,
    })
}

/// The first trading day on which a filing can move the price: the filing
/// day itself when it is a trading day and the (local) clock time is before
/// `market_close`, otherwise the next trading day.
pub fn event_date_for(
    filed_at: &DateTime<FixedOffset>,
    calendar: &[NaiveDate],
    market_close: NaiveTime,
) -> Result<NaiveDate, SkipReason> {
    let local = filed_at.naive_local();
    let (date, time) = (local.date(), local.time());
    if calendar.first().is_none_or(|&first| date < first) {
        return Err(SkipReason::NoCalendar);
    }
    let idx = calendar.partition_point(|&d| d < date);
    let same_day = calendar.get(idx) == Some(&date);
    let pick = if same_day && time < market_close {
        idx
    } else if same_day {
        idx + 1
    } else {
        idx
    };
    calendar.get(pick).copied().ok_or(SkipReason::NoCalendar)
}

/// 100 · (R_stock − α̂ − β̂·R_market) on `event_date`.
pub fn abnormal_return(
    event_date: NaiveDate,
    fit: &MarketModelFit,
    stock: &Returns,
    market: &Returns,
) -> Result<f64, SkipReason> {
    let rs = stock.get(event_date).ok_or(SkipReason::MissingPrice)?;
    let rm = market.get(event_date).ok_or(SkipReason::MissingPrice)?;
    Ok(100.0 * (rs - fit.alpha_hat - fit.beta_hat * rm))
}

/// Sum of daily abnormal returns (percent) over `days` consecutive trading
/// days starting at `event_date`.
pub fn cumulative_abnormal_return(
    event_date: NaiveDate,
    days: usize,
    calendar: &[NaiveDate],
    fit: &MarketModelFit,
    stock: &Returns,
    market: &Returns,
) -> Result<f64, SkipReason> {
    let start = calendar
        .binary_search(&event_date)
        .map_err(|_| SkipReason::NoCalendar)?;
    let window = calendar
        .get(start..start + days)
        .ok_or(SkipReason::NoCalendar)?;
    window
        .iter()
        .map(|&d| abnormal_return(d, fit, stock, market))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStudyConfig {
    /// Estimation window length in trading days.
    pub est_len: usize,
    /// Trading days between the end of the estimation window and the event.
    pub gap: usize,
    /// Minimum paired observations inside the estimation window.
    pub min_obs: usize,
    pub market_close: NaiveTime,
}

impl Default for EventStudyConfig {
    fn default() -> Self {
        EventStudyConfig {
            est_len: 252,
            gap: 20,
            min_obs: 100,
            market_close: NaiveTime::from_hms_opt(16, 0, 0).expect("valid time"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventStatus {
    Ok,
    Skipped(SkipReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventResult {
    pub filing_id: String,
    pub ticker: String,
    pub event_date: Option<NaiveDate>,
    /// Percent; `None` unless the status is ok.
    pub abnormal_return: Option<f64>,
    pub status: EventStatus,
}

impl EventResult {
    pub fn is_ok(&self) -> bool {
        self.status == EventStatus::Ok
    }
}

/// Estimation window `[e − gap − est_len + 1, e − gap]` in calendar indices,
/// clipped so it never starts on the first calendar day (which has no
/// return).
fn estimation_window(
    calendar: &[NaiveDate],
    event_idx: usize,
    config: &EventStudyConfig,
) -> Option<(NaiveDate, NaiveDate)> {
    let end = event_idx.checked_sub(config.gap)?;
    let start = (end + 1).saturating_sub(config.est_len).max(1);
    (start <= end).then(|| (calendar[start], calendar[end]))
}

/// Builds the event-day calendar from the market index and produces one
/// result per filing, sorted by `(event_date, filing_id)`.
pub fn run_event_study(
    corpus: &Corpus,
    prices: &PriceStore,
    market: &PriceSeries,
    config: &EventStudyConfig,
) -> Vec<EventResult> {
    let calendar: Vec<NaiveDate> = market.dates().collect();
    let market_returns = simple_returns(market).ok();
    let mut stock_returns: BTreeMap<&str, Option<Returns>> = BTreeMap::new();

    let mut results: Vec<EventResult> = corpus
        .filings()
        .iter()
        .map(|filing| {
            let mut result = EventResult {
                filing_id: filing.filing_id.clone(),
                ticker: filing.ticker.clone(),
                event_date: None,
                abnormal_return: None,
                status: EventStatus::Ok,
            };
            let outcome = (|| {
                let event_date = event_date_for(&filing.filed_at, &calendar, config.market_close)?;
                result.event_date = Some(event_date);
                let market_returns = market_returns.as_ref().ok_or(SkipReason::NoCalendar)?;
                let stock = stock_returns
                    .entry(filing.ticker.as_str())
                    .or_insert_with(|| {
                        prices
                            .get(&filing.ticker)
                            .and_then(|s| simple_returns(s).ok())
                    })
                    .as_ref()
                    .ok_or(SkipReason::MissingPrice)?;
                let event_idx = calendar
                    .binary_search(&event_date)
                    .map_err(|_| SkipReason::NoCalendar)?;
                let window = estimation_window(&calendar, event_idx, config)
                    .ok_or(SkipReason::InsufficientHistory)?;
                let fit = estimate_market_model(stock, market_returns, window, config.min_obs)?;
                abnormal_return(event_date, &fit, stock, market_returns)
            })();
            match outcome {
                Ok(ar) if ar.is_finite() => result.abnormal_return = Some(ar),
                Ok(_) => result.status = EventStatus::Skipped(SkipReason::MissingPrice),
                Err(reason) => result.status = EventStatus::Skipped(reason),
            }
            result
        })
        .collect();
    results.sort_by(|a, b| (a.event_date, &a.filing_id).cmp(&(b.event_date, &b.filing_id)));
    results
}
