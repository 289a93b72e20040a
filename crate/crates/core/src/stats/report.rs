//! Row builders for the four report tables.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{
    bartlett, bootstrap_median_test, kruskal_wallis, median, one_sample_t_test, summary_stats,
    StatsError, SummaryStats, TestResult,
};
use crate::eventstudy::EventResult;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// What the tables need to know about a filing, independent of its text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilingSummary {
    pub filing_id: String,
    pub ticker: String,
    pub filed_date: NaiveDate,
    pub stemmed_length: u64,
}

fn ok_returns(events: &[EventResult]) -> BTreeMap<&str, f64> {
    events
        .iter()
        .filter_map(|e| e.abnormal_return.map(|ar| (e.filing_id.as_str(), ar)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveRow {
    pub label: String,
    pub stats: Option<SummaryStats>,
}

/// Abnormal returns, filings per calendar month (every month between the
/// first and last filing, empty months included), and stemmed filing length.
pub fn table1(filings: &[FilingSummary], events: &[EventResult]) -> Vec<DescriptiveRow> {
    let ars: Vec<f64> = ok_returns(events).into_values().collect();

    let mut per_month: BTreeMap<(i32, u32), usize> = BTreeMap::new();
    for f in filings {
        *per_month
            .entry((f.filed_date.year(), f.filed_date.month()))
            .or_insert(0) += 1;
    }
    let mut monthly = Vec::new();
    if let (Some(&first), Some(&last)) = (per_month.keys().next(), per_month.keys().next_back()) {
        let (mut y, mut m) = first;
        while (y, m) <= last {
            monthly.push(per_month.get(&(y, m)).copied().unwrap_or(0) as f64);
            if m == 12 {
                y += 1;
                m = 1;
            } else {
                m += 1;
            }
        }
    }
    let lengths: Vec<f64> = filings.iter().map(|f| f.stemmed_length as f64).collect();

    [
        ("Abnormal Return (in %)", ars),
        ("Number of Filings (per Month)", monthly),
        ("Filing Length (Stemmed Words)", lengths),
    ]
    .into_iter()
    .map(|(label, values)| DescriptiveRow {
        label: label.into(),
        stats: summary_stats(&values).ok(),
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearReportRow {
    pub year: i32,
    pub average_ar: Option<f64>,
    pub median_ar: Option<f64>,
    pub std_dev_ar: Option<f64>,
    pub total_filings: usize,
    pub mean_filing_length: f64,
    pub covered_firms: usize,
    pub positive_filings: usize,
    pub negative_filings: usize,
}

pub fn table2(filings: &[FilingSummary], events: &[EventResult]) -> Vec<YearReportRow> {
    let ars = ok_returns(events);
    let mut by_year: BTreeMap<i32, Vec<&FilingSummary>> = BTreeMap::new();
    for f in filings {
        by_year.entry(f.filed_date.year()).or_default().push(f);
    }
    by_year
        .into_iter()
        .map(|(year, fs)| {
            let year_ars: Vec<f64> = fs
                .iter()
                .filter_map(|f| ars.get(f.filing_id.as_str()).copied())
                .collect();
            let stats = summary_stats(&year_ars).ok();
            let firms: BTreeSet<&str> = fs.iter().map(|f| f.ticker.as_str()).collect();
            YearReportRow {
                year,
                average_ar: stats.as_ref().map(|s| s.mean),
                median_ar: stats.as_ref().map(|s| s.median),
                std_dev_ar: stats.as_ref().and_then(|s| s.std_dev),
                total_filings: fs.len(),
                mean_filing_length: fs.iter().map(|f| f.stemmed_length as f64).sum::<f64>()
                    / fs.len() as f64,
                covered_firms: firms.len(),
                positive_filings: year_ars.iter().filter(|&&x| x > 0.0).count(),
                negative_filings: year_ars.iter().filter(|&&x| x < 0.0).count(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCorpusRow {
    pub topic: usize,
    pub covered_firms: usize,
    pub filings: usize,
    /// 0 when no filing is assigned.
    pub mean_filing_length: f64,
}

/// `topics[i]` is the topic of `filings[i]`; `None` rows are left out.
pub fn table3(
    filings: &[FilingSummary],
    topics: &[Option<usize>],
    k: usize,
) -> Vec<TopicCorpusRow> {
    let mut firms: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); k];
    let mut counts = vec![0usize; k];
    let mut lengths = vec![0u64; k];
    for (f, topic) in filings.iter().zip(topics) {
        if let Some(t) = *topic {
            firms[t].insert(&f.ticker);
            counts[t] += 1;
            lengths[t] += f.stemmed_length;
        }
    }
    (0..k)
        .map(|t| TopicCorpusRow {
            topic: t,
            covered_firms: firms[t].len(),
            filings: counts[t],
            mean_filing_length: if counts[t] == 0 {
                0.0
            } else {
                lengths[t] as f64 / counts[t] as f64
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReturnRow {
    pub topic: usize,
    pub n: usize,
    pub median_ar: Option<f64>,
    pub median_abs_ar: Option<f64>,
    pub std_dev_ar: Option<f64>,
    /// Bootstrap test of a zero median; fails with fewer than two events.
    pub bootstrap: Result<TestResult, StatsError>,
    pub t_test: Result<TestResult, StatsError>,
}

impl TopicReturnRow {
    pub fn significant(&self) -> Option<bool> {
        self.bootstrap
            .as_ref()
            .ok()
            .map(|r| r.p_value < SIGNIFICANCE_LEVEL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub rows: Vec<TopicReturnRow>,
    /// Equal medians of |AR| across topics with at least one event.
    pub kruskal_wallis: Result<TestResult, StatsError>,
    /// Equal AR variances across topics with at least two events.
    pub bartlett: Result<TestResult, StatsError>,
    /// Ok events whose filing has no topic (empty documents).
    pub unassigned_events: usize,
}

/// Per-topic abnormal-return statistics plus the cross-topic tests. Each
/// topic's bootstrap uses the seed `seed ^ topic` so results do not depend on
/// evaluation order.
pub fn per_topic_report(
    events: &[EventResult],
    assignments: &BTreeMap<String, usize>,
    k: usize,
    replicates: usize,
    seed: u64,
) -> TopicReport {
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut unassigned_events = 0;
    // Fixed order regardless of how events were passed in.
    for (id, ar) in ok_returns(events) {
        match assignments.get(id) {
            Some(&t) if t < k => groups[t].push(ar),
            _ => unassigned_events += 1,
        }
    }
    let rows = groups
        .iter()
        .enumerate()
        .map(|(topic, ars)| {
            let abs: Vec<f64> = ars.iter().map(|x| x.abs()).collect();
            TopicReturnRow {
                topic,
                n: ars.len(),
                median_ar: median(ars).ok(),
                median_abs_ar: median(&abs).ok(),
                std_dev_ar: summary_stats(ars).ok().and_then(|s| s.std_dev),
                bootstrap: bootstrap_median_test(ars, replicates, seed ^ topic as u64),
                t_test: one_sample_t_test(ars),
            }
        })
        .collect();
    let abs_groups: Vec<Vec<f64>> = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| g.iter().map(|x| x.abs()).collect())
        .collect();
    let var_groups: Vec<Vec<f64>> = groups.iter().filter(|g| g.len() >= 2).cloned().collect();
    TopicReport {
        rows,
        kruskal_wallis: kruskal_wallis(&abs_groups),
        bartlett: bartlett(&var_groups),
        unassigned_events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventstudy::{EventStatus, SkipReason};
    use alloc::format;
    use alloc::string::ToString;

    fn event(id: &str, ar: Option<f64>) -> EventResult {
        EventResult {
            filing_id: id.to_string(),
            ticker: "T".to_string(),
            event_date: None,
            abnormal_return: ar,
            status: match ar {
                Some(_) => EventStatus::Ok,
                None => EventStatus::Skipped(SkipReason::MissingPrice),
            },
        }
    }

    fn fixture() -> (Vec<EventResult>, BTreeMap<String, usize>) {
        let mut events = Vec::new();
        let mut assignments = BTreeMap::new();
        for i in 0..6 {
            events.push(event(&format!("a{i}"), Some(2.0)));
            assignments.insert(format!("a{i}"), 0);
            events.push(event(&format!("b{i}"), Some(0.0)));
            assignments.insert(format!("b{i}"), 1);
        }
        events.push(event("skipped", None));
        (events, assignments)
    }

    #[test]
    fn degenerate_topics() {
        let (events, assignments) = fixture();
        let report = per_topic_report(&events, &assignments, 2, 200, 3);
        assert_eq!(report.rows[0].bootstrap.as_ref().unwrap().p_value, 0.0);
        assert_eq!(report.rows[1].bootstrap.as_ref().unwrap().p_value, 1.0);
        assert_eq!(report.rows[0].significant(), Some(true));
        assert_eq!(report.rows[1].median_abs_ar, Some(0.0));
        assert!(report.kruskal_wallis.is_ok());
        assert!(matches!(
            report.bartlett,
            Err(StatsError::ZeroVarianceGroup(_))
        ));
    }

    #[test]
    fn single_topic_has_no_cross_tests() {
        let (events, _) = fixture();
        let assignments = events.iter().map(|e| (e.filing_id.clone(), 0)).collect();
        let report = per_topic_report(&events, &assignments, 1, 200, 3);
        assert_eq!(report.kruskal_wallis, Err(StatsError::TooFewGroups));
        assert_eq!(report.bartlett, Err(StatsError::TooFewGroups));
        assert_eq!(report.rows[0].n, 12);
    }

    #[test]
    fn event_order_is_irrelevant() {
        let (mut events, assignments) = fixture();
        let a = per_topic_report(&events, &assignments, 3, 200, 3);
        events.reverse();
        let b = per_topic_report(&events, &assignments, 3, 200, 3);
        assert_eq!(a, b);
        assert_eq!(a.rows[2].n, 0);
        assert!(a.rows[2].bootstrap.is_err());
    }

    fn summary(id: &str, ticker: &str, y: i32, m: u32, len: u64) -> FilingSummary {
        FilingSummary {
            filing_id: id.into(),
            ticker: ticker.into(),
            filed_date: NaiveDate::from_ymd_opt(y, m, 15).unwrap(),
            stemmed_length: len,
        }
    }

    #[test]
    fn descriptive_tables() {
        let filings = [
            summary("f1", "A", 2004, 11, 100),
            summary("f2", "B", 2005, 1, 300),
            summary("f3", "A", 2005, 1, 200),
        ];
        let events = [
            event("f1", Some(1.0)),
            event("f2", Some(-3.0)),
            event("f3", None),
        ];
        let t1 = table1(&filings, &events);
        assert_eq!(t1.len(), 3);
        assert_eq!(t1[0].stats.as_ref().unwrap().n, 2);
        // Nov, Dec (empty), Jan.
        assert_eq!(t1[1].stats.as_ref().unwrap().n, 3);
        assert_eq!(t1[1].stats.as_ref().unwrap().min, 0.0);
        assert_eq!(t1[2].stats.as_ref().unwrap().max, 300.0);

        let t2 = table2(&filings, &events);
        assert_eq!(t2.len(), 2);
        assert_eq!(t2[1].total_filings, 2);
        assert_eq!(t2[1].covered_firms, 2);
        assert_eq!(t2[1].negative_filings, 1);
        assert_eq!(t2[1].mean_filing_length, 250.0);
        assert_eq!(t2[1].average_ar, Some(-3.0));

        let t3 = table3(&filings, &[Some(0), Some(1), None], 2);
        assert_eq!(t3[0].filings, 1);
        assert_eq!(t3[1].covered_firms, 1);
        assert_eq!(t3[1].mean_filing_length, 300.0);
    }
}
