//! Python bindings: corpus loading, rankings, dismantling curves, cohort
//! labels, content features and the hypothesis tests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use sst_core::cohorts::{classify, CohortConfig};
use sst_core::corpus::{self, IngestOptions};
use sst_core::dismantling::{dismantle, optimal_ranking, Rounding};
use sst_core::features;
use sst_core::hashtags;
use sst_core::metrics::{self, MetricId, MetricTable};
use sst_core::stats;
use sst_core::synth::{self, SynthConfig};

fn to_py(e: sst_core::Error) -> PyErr {
    match e {
        sst_core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_metric(name: &str) -> PyResult<MetricId> {
    name.parse().map_err(to_py)
}

fn table_rows(table: &MetricTable) -> Vec<(String, f64)> {
    table
        .ranking()
        .iter()
        .map(|u| (u.clone(), table.scores()[u]))
        .collect()
}

/// A validated retweet corpus.
#[pyclass(module = "sst", frozen)]
struct Corpus {
    inner: corpus::Corpus,
}

#[pymethods]
impl Corpus {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(records={}, users={})",
            self.inner.len(),
            self.inner.users().len()
        )
    }

    /// Original tweeters in id order.
    fn original_users(&self) -> Vec<String> {
        self.inner.original_users().into_iter().map(String::from).collect()
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl_string()
    }

    /// Keeps users with at least one tweet scored above `threshold`.
    #[pyo3(signature = (threshold = corpus::DEFAULT_CONSPIRACY_THRESHOLD))]
    fn filter_conspiracy(&self, threshold: f64) -> PyResult<Corpus> {
        Ok(Corpus {
            inner: corpus::filter_conspiracy(&self.inner, threshold).map_err(to_py)?,
        })
    }

    /// `(user_id, score)` pairs in ranking order.
    fn rank(&self, metric: &str) -> PyResult<Vec<(String, f64)>> {
        Ok(table_rows(&metrics::metric_table(&self.inner, parse_metric(metric)?)))
    }

    /// All 27 metric names mapped to their rankings.
    fn rank_all(&self) -> PyResult<BTreeMap<String, Vec<(String, f64)>>> {
        let tables = metrics::compute_all_metrics(&self.inner).map_err(to_py)?;
        Ok(tables.iter().map(|(id, t)| (id.name(), table_rows(t))).collect())
    }

    /// `(removed_users, remaining_records)` points; `"optimal"` ranks by contribution.
    fn dismantle(&self, ranking: &str) -> PyResult<Vec<(usize, usize)>> {
        let table = if ranking.eq_ignore_ascii_case("optimal") {
            optimal_ranking(&self.inner)
        } else {
            metrics::metric_table(&self.inner, parse_metric(ranking)?)
        };
        Ok(dismantle(&self.inner, &table).map_err(to_py)?.points)
    }

    /// Cohort label per user.
    #[pyo3(signature = (bot_threshold = 0.4, ss_fraction = 0.001, floor = false))]
    fn cohorts(&self, bot_threshold: f64, ss_fraction: f64, floor: bool) -> PyResult<BTreeMap<String, String>> {
        let ranked = match corpus::filter_conspiracy(&self.inner, self.inner.conspiracy_threshold()) {
            Ok(c) => c,
            Err(sst_core::Error::NoClassifierScores) => self.inner.clone(),
            Err(e) => return Err(to_py(e)),
        };
        let h = metrics::metric_table(&ranked, MetricId::HIndex);
        let config = CohortConfig {
            bot_threshold,
            superspreader_fraction: ss_fraction,
            rounding: if floor { Rounding::Floor } else { Rounding::Ceil },
        };
        let a = classify(&self.inner, &h, &config).map_err(to_py)?;
        Ok(a.labels.into_iter().map(|(u, l)| (u, l.as_str().to_string())).collect())
    }
}

/// Reads a JSON-lines or CSV corpus.
#[pyfunction]
#[pyo3(signature = (path, conspiracy_threshold = corpus::DEFAULT_CONSPIRACY_THRESHOLD))]
fn ingest(path: PathBuf, conspiracy_threshold: f64) -> PyResult<Corpus> {
    let ingested = corpus::ingest_path(&path, IngestOptions { conspiracy_threshold }).map_err(to_py)?;
    Ok(Corpus { inner: ingested.corpus })
}

/// Seeded synthetic corpus.
#[pyfunction]
#[pyo3(signature = (users = 1000, zipf_exponent = 1.5, seed = 42, max_records = None))]
fn synthesize(users: usize, zipf_exponent: f64, seed: u64, max_records: Option<usize>) -> PyResult<Corpus> {
    let config = SynthConfig {
        users,
        zipf_exponent,
        seed,
        max_records,
        ..Default::default()
    };
    Ok(Corpus {
        inner: synth::generate(&config).map_err(to_py)?,
    })
}

#[pyfunction]
fn h_index(counts: Vec<u64>) -> u64 {
    metrics::h_index(&counts)
}

#[pyfunction]
fn g_index(counts: Vec<u64>) -> u64 {
    metrics::g_index(&counts)
}

#[pyfunction]
fn clean_text(text: &str) -> String {
    corpus::clean_text(text)
}

/// `(grade, excluded)` for already-cleaned text.
#[pyfunction]
fn flesch_kincaid(text: &str) -> PyResult<(f64, bool)> {
    let s = features::flesch_kincaid(text).map_err(to_py)?;
    Ok((s.grade, s.excluded))
}

#[pyfunction]
fn sentiment_label(compound: f64) -> &'static str {
    features::sentiment_label(compound).as_str()
}

#[pyfunction]
fn extract_hashtags(text: &str) -> Vec<String> {
    hashtags::extract_hashtags(text)
}

/// `(F, p_value, (df_between, df_within))`.
#[pyfunction]
fn anova_oneway(groups: Vec<Vec<f64>>) -> PyResult<(f64, f64, (u64, u64))> {
    let r = stats::anova_oneway(&groups).map_err(to_py)?;
    match r.df {
        stats::Df::Two(a, b) => Ok((r.statistic, r.p_value, (a, b))),
        _ => unreachable!("anova reports two degrees of freedom"),
    }
}

/// `(chi2, p_value, df)`.
#[pyfunction]
fn chi_square_independence(table: Vec<Vec<u64>>) -> PyResult<(f64, f64, u64)> {
    let r = stats::chi_square_independence(&table).map_err(to_py)?;
    match r.df {
        stats::Df::One(d) => Ok((r.statistic, r.p_value, d)),
        _ => unreachable!("chi-square reports one degree of freedom"),
    }
}

/// `(T, p_value)`; exact for pooled sizes up to 20.
#[pyfunction]
fn cvm_two_sample(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = stats::cvm_two_sample(&xs, &ys).map_err(to_py)?;
    Ok((r.statistic, r.p_value))
}

/// Names of the 27 metrics in canonical order.
#[pyfunction]
fn metric_names() -> Vec<String> {
    MetricId::all().into_iter().map(MetricId::name).collect()
}

#[pymodule]
fn sst(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(h_index, m)?)?;
    m.add_function(wrap_pyfunction!(g_index, m)?)?;
    m.add_function(wrap_pyfunction!(clean_text, m)?)?;
    m.add_function(wrap_pyfunction!(flesch_kincaid, m)?)?;
    m.add_function(wrap_pyfunction!(sentiment_label, m)?)?;
    m.add_function(wrap_pyfunction!(extract_hashtags, m)?)?;
    m.add_function(wrap_pyfunction!(anova_oneway, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_independence, m)?)?;
    m.add_function(wrap_pyfunction!(cvm_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(metric_names, m)?)?;
    Ok(())
}
