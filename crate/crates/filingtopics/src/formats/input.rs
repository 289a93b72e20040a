//! User-supplied inputs: filing metadata and texts, prices, stop words and
//! topic labels.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, TimeZone};
use filingtopics_core::{FilingRecord, PriceSeries, PriceStore, StopwordList};

use super::{csv_reader, read_text, records, FormatError};

pub const METADATA_HEADER: [&str; 6] = [
    "filing_id",
    "cik",
    "ticker",
    "firm_name",
    "filed_at",
    "text_path",
];
pub const PRICES_HEADER: [&str; 3] = ["date", "ticker", "adj_close"];
pub const MARKET_HEADER: [&str; 2] = ["date", "adj_close"];

/// ISO-8601 timestamp with offset, or a bare date read as midnight UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t);
    }
    if let Ok(t) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M%:z") {
        return Some(t);
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    FixedOffset::east_opt(0)?
        .from_local_datetime(&date.and_hms_opt(0, 0, 0)?)
        .single()
}

fn parse_date(path: &Path, line: usize, s: &str) -> Result<NaiveDate, FormatError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| FormatError::parse(path, line, format!("invalid date {s:?}")))
}

fn parse_price(path: &Path, line: usize, s: &str) -> Result<f64, FormatError> {
    match s.parse::<f64>() {
        Ok(p) if p > 0.0 && p.is_finite() => Ok(p),
        _ => Err(FormatError::parse(
            path,
            line,
            format!("invalid adj_close {s:?}"),
        )),
    }
}

/// Reads the metadata CSV and every referenced text file (relative to
/// `text_root`). Duplicate ids and missing texts are errors.
pub fn read_metadata(path: &Path, text_root: &Path) -> Result<Vec<FilingRecord>, FormatError> {
    let mut reader = csv_reader(path, &METADATA_HEADER)?;
    let mut seen = BTreeSet::new();
    let mut filings = Vec::new();
    for (line, r) in records(path, &mut reader)? {
        let field = |i: usize| r.get(i).unwrap_or("");
        let filing_id = field(0);
        if filing_id.is_empty() {
            return Err(FormatError::parse(path, line, "empty filing_id"));
        }
        if !seen.insert(filing_id.to_string()) {
            return Err(FormatError::parse(
                path,
                line,
                format!("duplicate filing_id {filing_id:?}"),
            ));
        }
        let filed_at = parse_timestamp(field(4)).ok_or_else(|| {
            FormatError::parse(path, line, format!("invalid filed_at {:?}", field(4)))
        })?;
        let text_path = text_root.join(field(5));
        let text = std::fs::read_to_string(&text_path).map_err(|e| {
            FormatError::parse(
                path,
                line,
                format!(
                    "filing {filing_id}: cannot read {}: {e}",
                    text_path.display()
                ),
            )
        })?;
        filings.push(FilingRecord::new(
            filing_id,
            field(1),
            field(2),
            field(3),
            filed_at,
            text,
        ));
    }
    Ok(filings)
}

/// Reads `date,ticker,adj_close` rows in any order.
pub fn read_prices(path: &Path) -> Result<PriceStore, FormatError> {
    let mut reader = csv_reader(path, &PRICES_HEADER)?;
    let mut by_ticker: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for (line, r) in records(path, &mut reader)? {
        let date = parse_date(path, line, r.get(0).unwrap_or(""))?;
        let ticker = r.get(1).unwrap_or("");
        let price = parse_price(path, line, r.get(2).unwrap_or(""))?;
        if by_ticker
            .entry(ticker.to_string())
            .or_default()
            .insert(date, price)
            .is_some()
        {
            return Err(FormatError::parse(
                path,
                line,
                format!("second price for {ticker} on {date}"),
            ));
        }
    }
    by_ticker
        .into_iter()
        .map(|(ticker, obs)| {
            PriceSeries::new(ticker, obs.into_iter().collect())
                .map_err(|e| FormatError::invalid(path, e.to_string()))
        })
        .collect()
}

/// Reads the market index; its dates are the trading calendar.
pub fn read_market(path: &Path) -> Result<PriceSeries, FormatError> {
    let mut reader = csv_reader(path, &MARKET_HEADER)?;
    let mut obs = BTreeMap::new();
    for (line, r) in records(path, &mut reader)? {
        let date = parse_date(path, line, r.get(0).unwrap_or(""))?;
        let price = parse_price(path, line, r.get(1).unwrap_or(""))?;
        if obs.insert(date, price).is_some() {
            return Err(FormatError::parse(
                path,
                line,
                format!("second index value on {date}"),
            ));
        }
    }
    PriceSeries::new("market", obs.into_iter().collect())
        .map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn read_stopwords(path: &Path) -> Result<StopwordList, FormatError> {
    Ok(StopwordList::parse(&read_text(path)?))
}

/// `topic_id<TAB>label` lines; blank lines and `#` comments are ignored.
pub fn read_labels(path: &Path) -> Result<BTreeMap<usize, String>, FormatError> {
    let mut labels = BTreeMap::new();
    for (i, raw) in read_text(path)?.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| FormatError::parse(path, i + 1, "expected topic_id<TAB>label"))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| FormatError::parse(path, i + 1, format!("invalid topic id {id:?}")))?;
        if labels.insert(id, label.trim().to_string()).is_some() {
            return Err(FormatError::parse(
                path,
                i + 1,
                format!("topic {id} labelled twice"),
            ));
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        let t = parse_timestamp("2006-03-01T17:05:00-05:00").unwrap();
        assert_eq!(t.offset().local_minus_utc(), -5 * 3600);
        assert_eq!(t.format("%H:%M").to_string(), "17:05");
        assert!(parse_timestamp("2006-03-01T17:05-05:00").is_some());
        let d = parse_timestamp("2006-03-01").unwrap();
        assert_eq!(d.format("%Y-%m-%d %H:%M").to_string(), "2006-03-01 00:00");
        assert!(parse_timestamp("2006-03-01 17:05").is_none());
        assert!(parse_timestamp("yesterday").is_none());
    }

    #[test]
    fn metadata_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let meta = dir.path().join("meta.csv");
        std::fs::write(dir.path().join("a.txt"), "some text").unwrap();
        std::fs::write(
            &meta,
            "filing_id,cik,ticker,firm_name,filed_at,text_path\n\
             A,1,AAA,\"Alpha, Inc.\",2006-03-01T10:00:00-05:00,a.txt\n\
             B,2,BBB,Beta,2006-03-01,missing.txt\n",
        )
        .unwrap();
        let err = read_metadata(&meta, dir.path()).unwrap_err().to_string();
        assert!(err.contains(":3:") && err.contains("missing.txt"), "{err}");

        std::fs::write(
            &meta,
            "filing_id,cik,ticker,firm_name,filed_at,text_path\n\
             A,1,AAA,\"Alpha, Inc.\",2006-03-01T10:00:00-05:00,a.txt\n\
             A,1,AAA,Alpha,2006-03-02,a.txt\n",
        )
        .unwrap();
        let err = read_metadata(&meta, dir.path()).unwrap_err().to_string();
        assert!(err.contains("duplicate filing_id"), "{err}");

        std::fs::write(
            &meta,
            "filing_id,cik,ticker,firm_name,filed_at,text_path\n\
             A,1,AAA,\"Alpha, Inc.\",2006-03-01T10:00:00-05:00,a.txt\n",
        )
        .unwrap();
        let filings = read_metadata(&meta, dir.path()).unwrap();
        assert_eq!(filings[0].firm_name, "Alpha, Inc.");
        assert_eq!(filings[0].word_count, 2);
    }

    #[test]
    fn prices_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let prices = dir.path().join("prices.csv");
        std::fs::write(
            &prices,
            "date,ticker,adj_close\n2006-01-04,AAA,10.5\n2006-01-03,AAA,10\n2006-01-03,BBB,7\n",
        )
        .unwrap();
        let store = read_prices(&prices).unwrap();
        assert_eq!(store.get("AAA").unwrap().observations().len(), 2);
        assert_eq!(
            store.close_on_or_before("AAA", NaiveDate::from_ymd_opt(2006, 1, 9).unwrap()),
            Some(10.5)
        );
        std::fs::write(&prices, "date,ticker,adj_close\n2006-01-04,AAA,-1\n").unwrap();
        assert!(read_prices(&prices)
            .unwrap_err()
            .to_string()
            .contains(":2:"));
        std::fs::write(&prices, "day,ticker,adj_close\n").unwrap();
        assert!(read_prices(&prices).is_err());

        let labels = dir.path().join("labels.tsv");
        std::fs::write(&labels, "# names\n0\tEarnings\n3\tManagement change\n").unwrap();
        let l = read_labels(&labels).unwrap();
        assert_eq!(l[&3], "Management change");
        std::fs::write(&labels, "0 Earnings\n").unwrap();
        assert!(read_labels(&labels).is_err());
    }
}
