//! Tabular artifact writers. Every file is UTF-8 CSV with a header row and
//! LF line endings; reals are printed with nine significant digits so that
//! outputs are stable across platforms.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cohorts::CohortAssignment;
use crate::corpus::{Corpus, IngestSummary};
use crate::dismantling::{DismantlingCurve, ImpactReport};
use crate::error::{Error, Result};
use crate::metrics::{MetricId, MetricTable};
use crate::stats::TestResult;

/// Formats a real with nine significant digits, dropping trailing zeros.
/// Very small or very large magnitudes use scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        let s = format!("{x:.8e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - mag).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV file under construction.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        writer.write_record(header)?;
        Ok(CsvOut { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Writes a non-CSV text artifact through `body`.
pub fn write_text<F>(path: impl AsRef<Path>, body: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = path.as_ref().to_path_buf();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn write_ingest_summary(path: impl AsRef<Path>, s: &IngestSummary) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["stage", "count"])?;
    for (stage, n) in [
        ("records_read", s.records_read),
        ("malformed", s.malformed),
        ("non_retweet", s.non_retweet),
        ("invalid_timestamp", s.invalid_timestamp),
        ("incomplete", s.incomplete),
        ("duplicates", s.duplicates),
        ("retained", s.retained),
    ] {
        out.row([stage.to_string(), n.to_string()])?;
    }
    out.finish()
}

/// `rank,user_id,score` in ranking order.
pub fn write_metric_table(path: impl AsRef<Path>, table: &MetricTable) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["rank", "user_id", "score"])?;
    for (i, u) in table.ranking().iter().enumerate() {
        out.row([(i + 1).to_string(), u.clone(), fmt_real(table.scores()[u])])?;
    }
    out.finish()
}

/// One row per user, one column per metric.
pub fn write_combined_metrics(path: impl AsRef<Path>, tables: &BTreeMap<MetricId, MetricTable>) -> Result<PathBuf> {
    let ids = MetricId::all();
    let mut header = vec!["user_id".to_string()];
    header.extend(ids.iter().map(|m| m.name()));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = CsvOut::create(path, &header_refs)?;
    let users = tables.values().next().map(|t| t.scores().keys().cloned().collect::<Vec<_>>()).unwrap_or_default();
    for u in users {
        let mut row = vec![u.clone()];
        row.extend(ids.iter().map(|m| tables.get(m).and_then(|t| t.score(&u)).map(fmt_real).unwrap_or_default()));
        out.row(row)?;
    }
    out.finish()
}

pub fn write_curve(path: impl AsRef<Path>, curve: &DismantlingCurve) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["removed_users", "remaining_records", "removed_fraction"])?;
    for &(k, r) in &curve.points {
        out.row([k.to_string(), r.to_string(), fmt_real(curve.removed_fraction(k).unwrap_or(0.0))])?;
    }
    out.finish()
}

/// All curves stacked in long format.
pub fn write_curves_long(path: impl AsRef<Path>, curves: &[DismantlingCurve]) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["ranking", "removed_users", "remaining_records", "removed_fraction"])?;
    for c in curves {
        for &(k, r) in &c.points {
            out.row([c.id.to_string(), k.to_string(), r.to_string(), fmt_real(c.removed_fraction(k).unwrap_or(0.0))])?;
        }
    }
    out.finish()
}

pub fn write_difference(path: impl AsRef<Path>, diff: &[(usize, i64)]) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["removed_users", "remaining_difference"])?;
    for (k, d) in diff {
        out.row([k.to_string(), d.to_string()])?;
    }
    out.finish()
}

pub fn write_impact(path: impl AsRef<Path>, impact: &ImpactReport) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["user_id", "impact"])?;
    for (u, f) in &impact.0 {
        out.row([u.clone(), fmt_real(*f)])?;
    }
    out.finish()
}

pub fn write_cohorts(
    path: impl AsRef<Path>,
    corpus: &Corpus,
    assignment: &CohortAssignment,
    hindex: &MetricTable,
) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["user_id", "cohort", "bot_score", "h_index", "conspiracy_tweet_count"])?;
    for (u, label) in &assignment.labels {
        let profile = corpus.user(u);
        out.row([
            u.clone(),
            label.as_str().to_string(),
            profile.and_then(|p| p.bot_score).map(fmt_real).unwrap_or_default(),
            fmt_real(hindex.score(u).unwrap_or(0.0)),
            profile.map_or(0, |p| p.conspiracy_tweet_count).to_string(),
        ])?;
    }
    out.finish()
}

/// One row of the hypothesis-test report.
#[derive(Debug, Clone, PartialEq)]
pub struct TestRow {
    pub test: &'static str,
    pub variable: String,
    pub cohort_set: String,
    pub result: TestResult,
}

pub fn write_tests(path: impl AsRef<Path>, rows: &[TestRow]) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["test", "variable", "cohort_set", "statistic", "df", "p_value"])?;
    for r in rows {
        out.row([
            r.test.to_string(),
            r.variable.clone(),
            r.cohort_set.clone(),
            fmt_real(r.result.statistic),
            r.result.df.to_string(),
            fmt_real(r.result.p_value),
        ])?;
    }
    out.finish()
}
