//! Report tables as CSV.

use std::collections::BTreeMap;
use std::path::Path;

use filingtopics_core::lda::TopicCountDiagnostics;
use filingtopics_core::stats::report::{
    DescriptiveRow, TopicCorpusRow, TopicReport, YearReportRow,
};
use filingtopics_core::stats::{StatsError, TestResult};

use super::{num, opt_num, CsvOut, FormatError};

pub fn write_table1(path: &Path, rows: &[DescriptiveRow]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&[
        "variable", "n", "mean", "median", "min", "max", "std_dev", "skewness", "kurtosis",
    ]);
    for r in rows {
        let mut fields = vec![r.label.clone()];
        match &r.stats {
            Some(s) => fields.extend([
                s.n.to_string(),
                num(s.mean),
                num(s.median),
                num(s.min),
                num(s.max),
                opt_num(s.std_dev),
                opt_num(s.skewness),
                opt_num(s.excess_kurtosis),
            ]),
            None => fields.extend(
                ["0".to_string()]
                    .into_iter()
                    .chain(std::iter::repeat_n(String::new(), 7)),
            ),
        }
        out.row(fields);
    }
    out.save(path)
}

pub fn write_table2(path: &Path, rows: &[YearReportRow]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&[
        "year",
        "average_ar",
        "median_ar",
        "std_dev_ar",
        "total_filings",
        "filing_length",
        "covered_firms",
        "positive_filings",
        "negative_filings",
    ]);
    for r in rows {
        out.row([
            r.year.to_string(),
            opt_num(r.average_ar),
            opt_num(r.median_ar),
            opt_num(r.std_dev_ar),
            r.total_filings.to_string(),
            num(r.mean_filing_length),
            r.covered_firms.to_string(),
            r.positive_filings.to_string(),
            r.negative_filings.to_string(),
        ]);
    }
    out.save(path)
}

pub fn write_table3(
    path: &Path,
    rows: &[TopicCorpusRow],
    labels: &BTreeMap<usize, String>,
) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&[
        "topic_id",
        "label",
        "covered_firms",
        "filings",
        "filing_length",
    ]);
    for r in rows {
        out.row([
            r.topic.to_string(),
            labels.get(&r.topic).cloned().unwrap_or_default(),
            r.covered_firms.to_string(),
            r.filings.to_string(),
            num(r.mean_filing_length),
        ]);
    }
    out.save(path)
}

const TABLE4_HEADER: [&str; 14] = [
    "row",
    "label",
    "n",
    "median_ar",
    "median_abs_ar",
    "std_dev_ar",
    "statistic",
    "df",
    "p_value",
    "ci_low",
    "ci_high",
    "t_test_p_value",
    "significant",
    "note",
];

fn not_computable(e: &StatsError) -> String {
    format!("not computable: {e}")
}

/// One row per topic, then the Kruskal–Wallis and Bartlett rows. Tests that
/// could not run leave their cells empty and explain why in `note`.
pub fn write_table4(
    path: &Path,
    report: &TopicReport,
    labels: &BTreeMap<usize, String>,
) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&TABLE4_HEADER);
    for r in &report.rows {
        let boot = r.bootstrap.as_ref().ok();
        let ci = boot.and_then(|b| b.ci);
        out.row([
            r.topic.to_string(),
            labels.get(&r.topic).cloned().unwrap_or_default(),
            r.n.to_string(),
            opt_num(r.median_ar),
            opt_num(r.median_abs_ar),
            opt_num(r.std_dev_ar),
            opt_num(boot.map(|b| b.statistic)),
            String::new(),
            opt_num(boot.map(|b| b.p_value)),
            opt_num(ci.map(|c| c.0)),
            opt_num(ci.map(|c| c.1)),
            opt_num(r.t_test.as_ref().ok().map(|t| t.p_value)),
            match r.significant() {
                Some(true) => "yes".to_string(),
                Some(false) => "no".to_string(),
                None => String::new(),
            },
            r.bootstrap
                .as_ref()
                .err()
                .map(not_computable)
                .unwrap_or_default(),
        ]);
    }
    let n_total: usize = report.rows.iter().map(|r| r.n).sum();
    for (name, test) in [
        ("kruskal_wallis", &report.kruskal_wallis),
        ("bartlett", &report.bartlett),
    ] {
        let ok: Option<&TestResult> = test.as_ref().ok();
        out.row([
            name.to_string(),
            String::new(),
            ok.map(|t| t.group_sizes.iter().sum::<usize>())
                .unwrap_or(n_total)
                .to_string(),
            String::new(),
            String::new(),
            String::new(),
            opt_num(ok.map(|t| t.statistic)),
            opt_num(ok.and_then(|t| t.df)),
            opt_num(ok.map(|t| t.p_value)),
            String::new(),
            String::new(),
            String::new(),
            match ok {
                Some(t) if t.p_value < filingtopics_core::stats::report::SIGNIFICANCE_LEVEL => {
                    "yes".into()
                }
                Some(_) => "no".into(),
                None => String::new(),
            },
            test.as_ref().err().map(not_computable).unwrap_or_default(),
        ]);
    }
    out.save(path)
}

pub fn write_ksweep(path: &Path, rows: &[TopicCountDiagnostics]) -> Result<(), FormatError> {
    let mut out = CsvOut::new(&["k", "perplexity", "topic_size_entropy", "topic_sizes"]);
    for r in rows {
        let sizes: Vec<String> = r.histogram.iter().map(usize::to_string).collect();
        out.row([
            r.k.to_string(),
            num(r.perplexity),
            num(r.topic_size_entropy),
            sizes.join(" "),
        ]);
    }
    out.save(path)
}
