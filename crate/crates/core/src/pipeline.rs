//! End-to-end commands: each reads a corpus, runs one stage of the analysis
//! and writes its artifacts under the output directory.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::cohorts::{classify, CohortAssignment, CohortConfig, CohortLabel, DEFAULT_BOT_THRESHOLD};
use crate::corpus::{
    clean_text, filter_conspiracy, ingest_path, Corpus, Emotion, IngestOptions, IngestSummary, Ingested,
    RetweetRecord, UserId, DEFAULT_CONSPIRACY_THRESHOLD,
};
use crate::dismantling::{
    compare_curves, curve_difference, dismantle, optimal_ranking, superspreader_cutoff, DismantlingCurve,
    ImpactReport, Rounding, DEFAULT_SUPERSPREADER_FRACTION,
};
use crate::error::{Error, Result};
use crate::features::{extract_features, flesch_kincaid, sentiment_label, word_frequency, FeatureVector, ReadabilityScore, Sentiment, Stopwords};
use crate::hashtags::{
    account_orientation_from_labels, build_cohashtag_graph, classify_orientation, top_hashtags, CoHashtagGraph,
    HashtagSet, Orientation, OrientationLexicon,
};
use crate::metrics::{compute_all_metrics, metric_table, MetricId, MetricTable, RankingId};
use crate::report::{self, fmt_real, CsvOut, TestRow};
use crate::stats::{anova_oneway, chi_square_independence};
use crate::synth::{generate_records, SynthConfig};

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub conspiracy_threshold: f64,
    pub bot_threshold: f64,
    pub ss_fraction: f64,
    pub rounding: Rounding,
    pub orientation_lexicon: Option<PathBuf>,
    pub conspiracy_hashtags: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub seed: u64,
    /// Removal steps compared by the curve distribution test.
    pub cvm_window: usize,
    /// Co-hashtag edges below this count are left out of exports.
    pub edge_floor: u64,
    pub top_n: usize,
    /// Rank and dismantle the whole corpus instead of conspiracy endorsers only.
    pub skip_filter: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output_dir: PathBuf::from("out"),
            conspiracy_threshold: DEFAULT_CONSPIRACY_THRESHOLD,
            bot_threshold: DEFAULT_BOT_THRESHOLD,
            ss_fraction: DEFAULT_SUPERSPREADER_FRACTION,
            rounding: Rounding::Ceil,
            orientation_lexicon: None,
            conspiracy_hashtags: None,
            stopwords: None,
            seed: 42,
            cvm_window: 100,
            edge_floor: 1,
            top_n: 10,
            skip_filter: false,
        }
    }
}

/// One layer of settings (flags, environment, or config file); unset
/// fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub conspiracy_threshold: Option<f64>,
    pub bot_threshold: Option<f64>,
    pub ss_fraction: Option<f64>,
    pub rounding: Option<String>,
    pub orientation_lexicon: Option<PathBuf>,
    pub conspiracy_hashtags: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cvm_window: Option<usize>,
    pub edge_floor: Option<u64>,
    pub top_n: Option<usize>,
    pub skip_filter: Option<bool>,
    pub jobs: Option<usize>,
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    /// Fields set here win; the rest come from `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            input: self.input.or(lower.input),
            output_dir: self.output_dir.or(lower.output_dir),
            conspiracy_threshold: self.conspiracy_threshold.or(lower.conspiracy_threshold),
            bot_threshold: self.bot_threshold.or(lower.bot_threshold),
            ss_fraction: self.ss_fraction.or(lower.ss_fraction),
            rounding: self.rounding.or(lower.rounding),
            orientation_lexicon: self.orientation_lexicon.or(lower.orientation_lexicon),
            conspiracy_hashtags: self.conspiracy_hashtags.or(lower.conspiracy_hashtags),
            stopwords: self.stopwords.or(lower.stopwords),
            seed: self.seed.or(lower.seed),
            cvm_window: self.cvm_window.or(lower.cvm_window),
            edge_floor: self.edge_floor.or(lower.edge_floor),
            top_n: self.top_n.or(lower.top_n),
            skip_filter: self.skip_filter.or(lower.skip_filter),
            jobs: self.jobs.or(lower.jobs),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            input: self.input,
            output_dir: self.output_dir.unwrap_or(d.output_dir),
            conspiracy_threshold: self.conspiracy_threshold.unwrap_or(d.conspiracy_threshold),
            bot_threshold: self.bot_threshold.unwrap_or(d.bot_threshold),
            ss_fraction: self.ss_fraction.unwrap_or(d.ss_fraction),
            rounding: self.rounding.as_deref().map(str::parse).transpose()?.unwrap_or(d.rounding),
            orientation_lexicon: self.orientation_lexicon,
            conspiracy_hashtags: self.conspiracy_hashtags,
            stopwords: self.stopwords,
            seed: self.seed.unwrap_or(d.seed),
            cvm_window: self.cvm_window.unwrap_or(d.cvm_window),
            edge_floor: self.edge_floor.unwrap_or(d.edge_floor),
            top_n: self.top_n.unwrap_or(d.top_n),
            skip_filter: self.skip_filter.unwrap_or(d.skip_filter),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("conspiracy_threshold", self.conspiracy_threshold),
            ("bot_threshold", self.bot_threshold),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ThresholdOutOfRange { name, value });
            }
        }
        if !(self.ss_fraction > 0.0 && self.ss_fraction <= 1.0) {
            return Err(Error::FractionOutOfRange(self.ss_fraction));
        }
        if self.top_n == 0 {
            return Err(Error::InvalidInput("top_n must be at least 1".into()));
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("no input file given".into()))
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

/// Reads and validates the configured input, logging rejected lines.
pub fn load_input(cfg: &RunConfig) -> Result<Ingested> {
    let ingested = ingest_path(
        cfg.input()?,
        IngestOptions {
            conspiracy_threshold: cfg.conspiracy_threshold,
        },
    )?;
    const SHOWN: usize = 20;
    for d in ingested.diagnostics.iter().take(SHOWN) {
        log::warn!("{d}");
    }
    if ingested.diagnostics.len() > SHOWN {
        log::warn!("... {} more rejected lines", ingested.diagnostics.len() - SHOWN);
    }
    Ok(ingested)
}

/// Writes the canonical corpus and the per-stage counts.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Ingested> {
    let ingested = load_input(cfg)?;
    let path = cfg.out("corpus.jsonl");
    report::write_text(&path, |w| {
        ingested
            .corpus
            .write_jsonl(w)
            .map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    report::write_ingest_summary(cfg.out("ingest_summary.csv"), &ingested.summary)?;
    log_summary(&ingested.summary);
    Ok(ingested)
}

fn log_summary(s: &IngestSummary) {
    log::info!(
        "read {} records: {} retained, {} duplicates, {} dropped",
        s.records_read,
        s.retained,
        s.duplicates,
        s.dropped()
    );
}

/// The corpus that rankings and dismantling operate on: records of users
/// who posted at least one conspiracy tweet, unless filtering is off or
/// no classifier scores exist.
pub fn ranking_corpus(corpus: &Corpus, cfg: &RunConfig) -> Result<Corpus> {
    if cfg.skip_filter {
        return Ok(corpus.clone());
    }
    match filter_conspiracy(corpus, cfg.conspiracy_threshold) {
        Ok(c) => Ok(c),
        Err(Error::NoClassifierScores) => {
            log::warn!("conspiracy_prob: skipped filter, ranking the whole corpus");
            Ok(corpus.clone())
        }
        Err(e) => Err(e),
    }
}

/// Writes one table per metric plus a combined table.
pub fn cmd_rank(corpus: &Corpus, cfg: &RunConfig) -> Result<BTreeMap<MetricId, MetricTable>> {
    let ranked = ranking_corpus(corpus, cfg)?;
    let tables = compute_all_metrics(&ranked)?;
    for (id, table) in &tables {
        report::write_metric_table(cfg.out(&format!("metrics/{}.csv", id.name())), table)?;
    }
    report::write_combined_metrics(cfg.out("metrics_combined.csv"), &tables)?;
    Ok(tables)
}

/// Each requested metric after the first is compared with the first.
pub fn default_pairs(metrics: &[MetricId]) -> Vec<(RankingId, RankingId)> {
    match metrics.split_first() {
        Some((first, rest)) => rest
            .iter()
            .map(|m| (RankingId::Metric(*first), RankingId::Metric(*m)))
            .collect(),
        None => Vec::new(),
    }
}

#[derive(Debug, Clone)]
pub struct DismantleOutcome {
    pub curves: BTreeMap<RankingId, DismantlingCurve>,
    /// Top of the H-index ranking at the configured fraction.
    pub superspreaders: Vec<UserId>,
}

pub fn cmd_dismantle(
    corpus: &Corpus,
    cfg: &RunConfig,
    metrics: &[MetricId],
    pairs: Option<&[(RankingId, RankingId)]>,
) -> Result<DismantleOutcome> {
    let ranked = ranking_corpus(corpus, cfg)?;
    let pairs = pairs.map_or_else(|| default_pairs(metrics), <[_]>::to_vec);

    let mut wanted: Vec<RankingId> = metrics.iter().map(|&m| RankingId::Metric(m)).collect();
    for &(a, b) in &pairs {
        for id in [a, b] {
            if !wanted.contains(&id) {
                wanted.push(id);
            }
        }
    }
    let mut tables: BTreeMap<RankingId, MetricTable> = wanted
        .par_iter()
        .filter_map(|id| match id {
            RankingId::Metric(m) => Some((*id, metric_table(&ranked, *m))),
            RankingId::Optimal => None,
        })
        .collect();
    tables.insert(RankingId::Optimal, optimal_ranking(&ranked));

    let curves: BTreeMap<RankingId, DismantlingCurve> = tables
        .par_iter()
        .map(|(id, t)| dismantle(&ranked, t).map(|c| (*id, c)))
        .collect::<Result<_>>()?;
    for (id, c) in &curves {
        report::write_curve(cfg.out(&format!("curves/{id}.csv")), c)?;
    }
    let all: Vec<DismantlingCurve> = curves.values().cloned().collect();
    report::write_curves_long(cfg.out("dismantling_curves.csv"), &all)?;

    for (a, b) in &pairs {
        let diff = curve_difference(&curves[a], &curves[b])?;
        report::write_difference(cfg.out(&format!("differences/{a}_minus_{b}.csv")), &diff)?;
    }

    let mut comparisons: Vec<(RankingId, RankingId)> =
        metrics.iter().map(|&m| (RankingId::Metric(m), RankingId::Optimal)).collect();
    comparisons.extend(pairs.iter().copied());
    if !comparisons.is_empty() {
        let mut out = CsvOut::create(
            cfg.out("cvm_comparison.csv"),
            &["curve_a", "curve_b", "window", "statistic", "p_value"],
        )?;
        for (a, b) in comparisons {
            let r = compare_curves(&curves[&a], &curves[&b], Some(cfg.cvm_window))?;
            out.row([
                a.to_string(),
                b.to_string(),
                cfg.cvm_window.to_string(),
                fmt_real(r.statistic),
                fmt_real(r.p_value),
            ])?;
        }
        out.finish()?;
    }

    let hindex = match tables.get(&RankingId::Metric(MetricId::HIndex)) {
        Some(t) => t.clone(),
        None => metric_table(&ranked, MetricId::HIndex),
    };
    let superspreaders = superspreader_cutoff(&hindex, cfg.ss_fraction, cfg.rounding)?;
    let impact = ImpactReport::of(&ranked);
    let mut out = CsvOut::create(cfg.out("superspreaders.csv"), &["rank", "user_id", "h_index", "impact"])?;
    for (i, u) in superspreaders.iter().enumerate() {
        out.row([
            (i + 1).to_string(),
            u.clone(),
            fmt_real(hindex.score(u).unwrap_or(0.0)),
            fmt_real(impact.0.get(u).copied().unwrap_or(0.0)),
        ])?;
    }
    out.finish()?;
    report::write_impact(cfg.out("impact.csv"), &impact)?;

    let k = superspreaders.len();
    let mut out = CsvOut::create(
        cfg.out("dismantling_summary.csv"),
        &["ranking", "removed_users", "removed_records", "removed_fraction"],
    )?;
    for (id, c) in &curves {
        let left = c.remaining_at(k).unwrap_or(0);
        out.row([
            id.to_string(),
            k.to_string(),
            (c.total_records - left).to_string(),
            fmt_real(c.removed_fraction(k).unwrap_or(1.0)),
        ])?;
    }
    out.finish()?;

    Ok(DismantleOutcome { curves, superspreaders })
}

/// Per-tweet measurements used by the cohort comparison.
struct TweetObs<'a> {
    record: &'a RetweetRecord,
    cohort: CohortLabel,
    features: FeatureVector,
    readability: Option<ReadabilityScore>,
    orientation: Orientation,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub assignment: CohortAssignment,
    /// Named analyses that were skipped, e.g. `"toxicity: skipped"`.
    pub warnings: Vec<String>,
    pub tests: Vec<TestRow>,
}

/// One representative record per distinct (author, text) tweet.
fn distinct_tweets(corpus: &Corpus) -> Vec<&RetweetRecord> {
    let mut seen = HashSet::new();
    corpus
        .records()
        .iter()
        .filter(|r| seen.insert((r.original_user_id.as_str(), r.text.as_str())))
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn cohort_set(labels: &[CohortLabel]) -> String {
    labels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("|")
}

/// Drops all-zero rows and columns; `None` when less than 2×2 remains.
fn trim_table(rows: Vec<(CohortLabel, Vec<u64>)>) -> Option<(Vec<CohortLabel>, Vec<Vec<u64>>)> {
    let rows: Vec<(CohortLabel, Vec<u64>)> = rows.into_iter().filter(|(_, r)| r.iter().any(|&x| x > 0)).collect();
    let width = rows.first()?.1.len();
    let keep: Vec<usize> = (0..width).filter(|&j| rows.iter().any(|(_, r)| r[j] > 0)).collect();
    if rows.len() < 2 || keep.len() < 2 {
        return None;
    }
    let labels = rows.iter().map(|(l, _)| *l).collect();
    let table = rows.into_iter().map(|(_, r)| keep.iter().map(|&j| r[j]).collect()).collect();
    Some((labels, table))
}

struct TestCollector {
    rows: Vec<TestRow>,
    warnings: Vec<String>,
}

impl TestCollector {
    fn anova(&mut self, variable: &str, groups: Vec<(CohortLabel, Vec<f64>)>) {
        let groups: Vec<(CohortLabel, Vec<f64>)> = groups.into_iter().filter(|(_, g)| g.len() >= 2).collect();
        if groups.len() < 2 {
            self.skip(format!("anova {variable}: skipped (fewer than two cohorts with data)"));
            return;
        }
        let labels: Vec<CohortLabel> = groups.iter().map(|(l, _)| *l).collect();
        let samples: Vec<Vec<f64>> = groups.into_iter().map(|(_, g)| g).collect();
        match anova_oneway(&samples) {
            Ok(result) => self.rows.push(TestRow {
                test: "anova",
                variable: variable.to_string(),
                cohort_set: cohort_set(&labels),
                result,
            }),
            Err(e) => self.skip(format!("anova {variable}: skipped ({e})")),
        }
    }

    fn chi_square(&mut self, variable: &str, rows: Vec<(CohortLabel, Vec<u64>)>) {
        let Some((labels, table)) = trim_table(rows) else {
            self.skip(format!("chi_square {variable}: skipped (table smaller than 2x2)"));
            return;
        };
        match chi_square_independence(&table) {
            Ok(result) => self.rows.push(TestRow {
                test: "chi_square",
                variable: variable.to_string(),
                cohort_set: cohort_set(&labels),
                result,
            }),
            Err(e) => self.skip(format!("chi_square {variable}: skipped ({e})")),
        }
    }

    fn skip(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// Cohort labels plus every per-cohort comparison table and test.
pub fn cmd_analyze(corpus: &Corpus, cfg: &RunConfig) -> Result<AnalyzeOutcome> {
    let lexicon = match &cfg.orientation_lexicon {
        Some(p) => OrientationLexicon::load(p)?,
        None => OrientationLexicon::bundled(),
    };
    let conspiracy_tags = match &cfg.conspiracy_hashtags {
        Some(p) => HashtagSet::load(p)?,
        None => HashtagSet::default_conspiracy(),
    };
    let stopwords = match &cfg.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => Stopwords::default(),
    };

    let ranked = ranking_corpus(corpus, cfg)?;
    let hindex = metric_table(&ranked, MetricId::HIndex);
    let assignment = classify(
        corpus,
        &hindex,
        &CohortConfig {
            bot_threshold: cfg.bot_threshold,
            superspreader_fraction: cfg.ss_fraction,
            rounding: cfg.rounding,
        },
    )?;
    report::write_cohorts(cfg.out("cohorts.csv"), corpus, &assignment, &hindex)?;

    let tweets = distinct_tweets(corpus);
    let obs: Vec<TweetObs> = tweets
        .par_iter()
        .map(|r| TweetObs {
            record: r,
            cohort: assignment.label(&r.original_user_id).expect("every author is labelled"),
            features: extract_features(r),
            readability: flesch_kincaid(&clean_text(&r.text)).ok(),
            orientation: classify_orientation(r, &lexicon),
        })
        .collect();
    let by_cohort = |label: CohortLabel| obs.iter().filter(move |o| o.cohort == label);

    let mut tests = TestCollector {
        rows: Vec::new(),
        warnings: Vec::new(),
    };

    // cohort sizes
    let mut out = CsvOut::create(cfg.out("cohort_summary.csv"), &["cohort", "users", "tweets"])?;
    for l in CohortLabel::ALL {
        out.row([l.as_str().to_string(), assignment.count(l).to_string(), by_cohort(l).count().to_string()])?;
    }
    out.finish()?;

    // per-tweet features
    let mut header = vec!["record_id", "user_id", "cohort"];
    header.extend(FeatureVector::BINARY_NAMES);
    header.extend(["raw_length", "unedited_length", "grade", "readability_excluded", "sentiment"]);
    let mut out = CsvOut::create(cfg.out("features.csv"), &header)?;
    for o in &obs {
        let mut row = vec![o.record.record_id.clone(), o.record.original_user_id.clone(), o.cohort.as_str().to_string()];
        row.extend(o.features.binary().iter().map(|b| u8::from(*b).to_string()));
        row.push(o.features.raw_length.to_string());
        row.push(o.features.unedited_length.to_string());
        row.push(o.readability.map(|s| fmt_real(s.grade)).unwrap_or_default());
        row.push(o.readability.map(|s| u8::from(s.excluded).to_string()).unwrap_or_default());
        row.push(o.record.sentiment_compound.map(|c| sentiment_label(c).to_string()).unwrap_or_default());
        out.row(row)?;
    }
    out.finish()?;

    // binary-feature rates and lengths
    let mut header = vec!["cohort", "tweets"];
    header.extend(FeatureVector::BINARY_NAMES);
    header.extend(["mean_raw_length", "mean_unedited_length"]);
    let mut out = CsvOut::create(cfg.out("feature_rates.csv"), &header)?;
    for l in CohortLabel::ALL {
        let group: Vec<&TweetObs> = by_cohort(l).collect();
        let n = group.len();
        let mut row = vec![l.as_str().to_string(), n.to_string()];
        for j in 0..FeatureVector::BINARY_NAMES.len() {
            let hits = group.iter().filter(|o| o.features.binary()[j]).count();
            row.push(fmt_real(if n == 0 { 0.0 } else { hits as f64 / n as f64 }));
        }
        let raw: Vec<f64> = group.iter().map(|o| o.features.raw_length as f64).collect();
        let unedited: Vec<f64> = group.iter().map(|o| o.features.unedited_length as f64).collect();
        row.push(fmt_real(mean(&raw)));
        row.push(fmt_real(mean(&unedited)));
        out.row(row)?;
    }
    out.finish()?;
    for (j, name) in FeatureVector::BINARY_NAMES.iter().enumerate() {
        tests.chi_square(
            name,
            CohortLabel::ALL
                .iter()
                .map(|&l| {
                    let hits = by_cohort(l).filter(|o| o.features.binary()[j]).count() as u64;
                    (l, vec![hits, by_cohort(l).count() as u64 - hits])
                })
                .collect(),
        );
    }
    for (name, len) in [
        ("raw_length", (|o: &TweetObs| o.features.raw_length) as fn(&TweetObs) -> usize),
        ("unedited_length", |o: &TweetObs| o.features.unedited_length),
    ] {
        tests.anova(
            name,
            CohortLabel::ALL
                .iter()
                .map(|&l| (l, by_cohort(l).map(|o| len(o) as f64).collect()))
                .collect(),
        );
    }

    // readability
    let mut out = CsvOut::create(cfg.out("readability.csv"), &["cohort", "scored", "excluded", "mean_grade"])?;
    let mut grades = Vec::new();
    for l in CohortLabel::ALL {
        let scored: Vec<ReadabilityScore> = by_cohort(l).filter_map(|o| o.readability).collect();
        let kept: Vec<f64> = scored.iter().filter(|s| !s.excluded).map(|s| s.grade).collect();
        out.row([
            l.as_str().to_string(),
            scored.len().to_string(),
            (scored.len() - kept.len()).to_string(),
            fmt_real(mean(&kept)),
        ])?;
        grades.push((l, kept));
    }
    out.finish()?;
    tests.anova("readability_grade", grades);

    // sentiment
    if obs.iter().any(|o| o.record.sentiment_compound.is_some()) {
        let mut out = CsvOut::create(cfg.out("sentiment.csv"), &["cohort", "scored", "positive", "neutral", "negative", "mean_compound"])?;
        let mut table = Vec::new();
        let mut compounds = Vec::new();
        for l in CohortLabel::ALL {
            let scores: Vec<f64> = by_cohort(l).filter_map(|o| o.record.sentiment_compound).collect();
            let counts: Vec<u64> = Sentiment::ALL
                .iter()
                .map(|&s| scores.iter().filter(|&&c| sentiment_label(c) == s).count() as u64)
                .collect();
            let mut row = vec![l.as_str().to_string(), scores.len().to_string()];
            row.extend(counts.iter().map(|&c| fmt_real(share(c, scores.len()))));
            row.push(fmt_real(mean(&scores)));
            out.row(row)?;
            table.push((l, counts));
            compounds.push((l, scores));
        }
        out.finish()?;
        tests.chi_square("sentiment_label", table);
        tests.anova("sentiment_compound", compounds);
    } else {
        tests.skip("sentiment: skipped".into());
    }

    // emotions
    if obs.iter().any(|o| o.record.emotion_label.is_some()) {
        let mut header = vec!["cohort", "scored"];
        header.extend(Emotion::ALL.iter().map(|e| e.as_str()));
        let mut out = CsvOut::create(cfg.out("emotions.csv"), &header)?;
        let mut table = Vec::new();
        for l in CohortLabel::ALL {
            let labels: Vec<Emotion> = by_cohort(l).filter_map(|o| o.record.emotion_label).collect();
            let counts: Vec<u64> = Emotion::ALL
                .iter()
                .map(|e| labels.iter().filter(|x| *x == e).count() as u64)
                .collect();
            let mut row = vec![l.as_str().to_string(), labels.len().to_string()];
            row.extend(counts.iter().map(|&c| fmt_real(share(c, labels.len()))));
            out.row(row)?;
            table.push((l, counts));
        }
        out.finish()?;
        tests.chi_square("emotion", table);
    } else {
        tests.skip("emotion: skipped".into());
    }

    // toxicity
    if obs.iter().any(|o| o.record.toxicity.is_some()) {
        let mut out = CsvOut::create(cfg.out("toxicity.csv"), &["cohort", "scored", "mean_toxicity"])?;
        let mut groups = Vec::new();
        for l in CohortLabel::ALL {
            let scores: Vec<f64> = by_cohort(l).filter_map(|o| o.record.toxicity).collect();
            out.row([l.as_str().to_string(), scores.len().to_string(), fmt_real(mean(&scores))])?;
            groups.push((l, scores));
        }
        out.finish()?;
        tests.anova("toxicity", groups);
    } else {
        tests.skip("toxicity: skipped".into());
    }

    // political orientation, per tweet and per account
    let mut per_user: BTreeMap<&str, Vec<Orientation>> = BTreeMap::new();
    for o in &obs {
        per_user.entry(o.record.original_user_id.as_str()).or_default().push(o.orientation);
    }
    let accounts: Vec<(CohortLabel, Orientation)> = per_user
        .into_iter()
        .map(|(u, labels)| (assignment.label(u).expect("labelled"), account_orientation_from_labels(labels)))
        .collect();
    let mut out = CsvOut::create(cfg.out("orientation.csv"), &["level", "cohort", "n", "left", "right", "non_political"])?;
    let mut tweet_table = Vec::new();
    let mut account_table = Vec::new();
    for l in CohortLabel::ALL {
        let t: Vec<u64> = Orientation::ALL
            .iter()
            .map(|&x| by_cohort(l).filter(|o| o.orientation == x).count() as u64)
            .collect();
        let a: Vec<u64> = Orientation::ALL
            .iter()
            .map(|&x| accounts.iter().filter(|(c, o)| *c == l && *o == x).count() as u64)
            .collect();
        for (level, counts) in [("tweet", &t), ("account", &a)] {
            let n: u64 = counts.iter().sum();
            let mut row = vec![level.to_string(), l.as_str().to_string(), n.to_string()];
            row.extend(counts.iter().map(|&c| fmt_real(share(c, n as usize))));
            out.row(row)?;
        }
        tweet_table.push((l, t));
        account_table.push((l, a));
    }
    out.finish()?;
    tests.chi_square("tweet_orientation", tweet_table);
    tests.chi_square("account_orientation", account_table);

    // frequency tables
    let groups: Vec<(String, Vec<&RetweetRecord>)> = std::iter::once(("all".to_string(), tweets.clone()))
        .chain(
            CohortLabel::ALL
                .iter()
                .map(|&l| (l.as_str().to_string(), by_cohort(l).map(|o| o.record).collect())),
        )
        .collect();
    let mut out = CsvOut::create(cfg.out("top_hashtags.csv"), &["cohort", "rank", "hashtag", "count"])?;
    for (name, records) in &groups {
        for (i, (tag, n)) in top_hashtags(records.iter().copied(), cfg.top_n).into_iter().enumerate() {
            out.row([name.clone(), (i + 1).to_string(), tag, n.to_string()])?;
        }
    }
    out.finish()?;
    let mut out = CsvOut::create(cfg.out("top_words.csv"), &["cohort", "rank", "word", "count"])?;
    for (name, records) in &groups {
        let texts: Vec<String> = records.iter().map(|r| clean_text(&r.text)).collect();
        for (i, (word, n)) in word_frequency(&texts, &stopwords, false).into_iter().take(cfg.top_n).enumerate() {
            out.row([name.clone(), (i + 1).to_string(), word, n.to_string()])?;
        }
    }
    out.finish()?;

    // co-hashtag network, built over shards and merged
    let graph = tweets
        .par_chunks(512)
        .map(|chunk| build_cohashtag_graph(chunk.iter().copied(), &conspiracy_tags))
        .reduce(CoHashtagGraph::new, CoHashtagGraph::merge);
    report::write_text(cfg.out("cohashtag.graphml"), |w| graph.write_graphml(w, cfg.edge_floor))?;
    report::write_text(cfg.out("cohashtag_edges.tsv"), |w| graph.write_edge_list(w, cfg.edge_floor))?;

    report::write_tests(cfg.out("stat_tests.csv"), &tests.rows)?;
    Ok(AnalyzeOutcome {
        assignment,
        warnings: tests.warnings,
        tests: tests.rows,
    })
}

fn share(count: u64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        count as f64 / n as f64
    }
}

/// Writes a seeded synthetic corpus and returns its path.
pub fn cmd_synth(cfg: &RunConfig, synth: &SynthConfig) -> Result<PathBuf> {
    let records = generate_records(synth)?;
    let corpus = Corpus::from_records(records, cfg.conspiracy_threshold)?;
    let path = cfg.out("synthetic_corpus.jsonl");
    report::write_text(&path, |w| {
        corpus.write_jsonl(w).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    Ok(path)
}

/// Ingest, rank, dismantle over all 27 metrics, and analyze.
pub fn cmd_report(cfg: &RunConfig) -> Result<AnalyzeOutcome> {
    let ingested = cmd_ingest(cfg)?;
    let corpus = &ingested.corpus;
    cmd_rank(corpus, cfg)?;
    cmd_dismantle(corpus, cfg, &MetricId::all(), None)?;
    cmd_analyze(corpus, cfg)
}

/// Every file path under `dir`, relative and sorted.
pub fn list_artifacts(dir: &Path) -> Result<BTreeSet<PathBuf>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeSet<PathBuf>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                out.insert(path.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = BTreeSet::new();
    walk(dir, dir, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_layers_take_first_set_value() {
        let flags = PartialConfig {
            bot_threshold: Some(0.5),
            ..Default::default()
        };
        let env = PartialConfig {
            bot_threshold: Some(0.6),
            seed: Some(7),
            ..Default::default()
        };
        let file = PartialConfig::from_toml_str("seed = 9\nss_fraction = 0.01\nrounding = \"floor\"\n").unwrap();
        let cfg = flags.over(env).over(file).resolve().unwrap();
        assert_eq!(cfg.bot_threshold, 0.5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.ss_fraction, 0.01);
        assert_eq!(cfg.rounding, Rounding::Floor);
        assert_eq!(cfg.conspiracy_threshold, 0.9);
    }

    #[test]
    fn config_validation() {
        assert!(PartialConfig::from_toml_str("bogus = 1").is_err());
        let bad = PartialConfig {
            bot_threshold: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(bad.resolve(), Err(Error::ThresholdOutOfRange { .. })));
        let bad = PartialConfig {
            rounding: Some("up".into()),
            ..Default::default()
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn default_pairs_anchor_on_first_metric() {
        assert!(default_pairs(&[]).is_empty());
        assert_eq!(
            default_pairs(&[MetricId::HIndex, MetricId::GIndex, MetricId::MIndex]),
            vec![
                (RankingId::Metric(MetricId::HIndex), RankingId::Metric(MetricId::GIndex)),
                (RankingId::Metric(MetricId::HIndex), RankingId::Metric(MetricId::MIndex)),
            ]
        );
    }

    #[test]
    fn trim_table_drops_empty_rows_and_columns() {
        use CohortLabel::*;
        let t = trim_table(vec![(BotSpreader, vec![1, 0, 2]), (HumanSpreader, vec![0, 0, 0]), (HumanNonSpreader, vec![3, 0, 1])]);
        assert_eq!(t, Some((vec![BotSpreader, HumanNonSpreader], vec![vec![1, 2], vec![3, 1]])));
        assert_eq!(trim_table(vec![(BotSpreader, vec![1, 1])]), None);
    }
}
