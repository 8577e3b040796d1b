//! The 27 influence metrics: four engagement families over six engagement
//! kinds, plus the H-, M- and G-indices.
//!
//! The unit of authorship is the distinct original tweet, reconstructed from
//! retweet records by `(original_user_id, text)`. Each engagement count of a
//! tweet is the largest value observed across its records, and its follower
//! weight is the largest follower count among its observed retweeters.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use crate::corpus::{Corpus, RetweetRecord, UserId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngagementKind {
    Retweets,
    Replies,
    Likes,
    Quotes,
    EngagementScore,
    NormalizedEngagementScore,
}

impl EngagementKind {
    pub const ALL: [EngagementKind; 6] = [
        EngagementKind::Retweets,
        EngagementKind::Replies,
        EngagementKind::Likes,
        EngagementKind::Quotes,
        EngagementKind::EngagementScore,
        EngagementKind::NormalizedEngagementScore,
    ];

    /// The four counted kinds that feed the composite scores.
    pub const BASE: [EngagementKind; 4] = [
        EngagementKind::Retweets,
        EngagementKind::Replies,
        EngagementKind::Likes,
        EngagementKind::Quotes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EngagementKind::Retweets => "retweets",
            EngagementKind::Replies => "replies",
            EngagementKind::Likes => "likes",
            EngagementKind::Quotes => "quotes",
            EngagementKind::EngagementScore => "es",
            EngagementKind::NormalizedEngagementScore => "es_norm",
        }
    }

    fn long_name(self) -> &'static str {
        match self {
            EngagementKind::EngagementScore => "engagementscore",
            EngagementKind::NormalizedEngagementScore => "normalizedengagementscore",
            other => other.as_str(),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Aggregate,
    PerTweet,
    FollowerWeightedAggregate,
    FollowerWeightedPerTweet,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Aggregate,
        Family::PerTweet,
        Family::FollowerWeightedAggregate,
        Family::FollowerWeightedPerTweet,
    ];

    fn long_name(self) -> &'static str {
        match self {
            Family::Aggregate => "aggregate",
            Family::PerTweet => "pertweet",
            Family::FollowerWeightedAggregate => "followerweightedaggregate",
            Family::FollowerWeightedPerTweet => "followerweightedpertweet",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Aggregate => "aggregate",
            Family::PerTweet => "per_tweet",
            Family::FollowerWeightedAggregate => "fw_aggregate",
            Family::FollowerWeightedPerTweet => "fw_per_tweet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricId {
    Family(Family, EngagementKind),
    HIndex,
    MIndex,
    GIndex,
}

impl MetricId {
    /// All 27 metrics in canonical order.
    pub fn all() -> Vec<MetricId> {
        let mut out: Vec<MetricId> = Family::ALL
            .iter()
            .flat_map(|&f| EngagementKind::ALL.iter().map(move |&k| MetricId::Family(f, k)))
            .collect();
        out.extend([MetricId::HIndex, MetricId::MIndex, MetricId::GIndex]);
        out
    }

    pub fn name(self) -> String {
        match self {
            MetricId::Family(f, k) => format!("{}_{}", f.as_str(), k.as_str()),
            MetricId::HIndex => "h_index".into(),
            MetricId::MIndex => "m_index".into(),
            MetricId::GIndex => "g_index".into(),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for MetricId {
    type Err = Error;

    /// Accepts canonical names (`h_index`, `fw_aggregate_es`) and spelled-out
    /// variants in any case (`HIndex`, `FollowerWeightedAggregateEngagementScore`).
    fn from_str(s: &str) -> Result<Self> {
        let wanted = squash(s);
        let long = |m: &MetricId| match m {
            MetricId::Family(f, k) => format!("{}{}", f.long_name(), k.long_name()),
            other => squash(&other.name()),
        };
        MetricId::all()
            .into_iter()
            .find(|m| squash(&m.name()) == wanted || long(m) == wanted)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Identifies where a ranking came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RankingId {
    Metric(MetricId),
    Optimal,
}

impl fmt::Display for RankingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankingId::Metric(m) => m.fmt(f),
            RankingId::Optimal => f.write_str("optimal"),
        }
    }
}

impl FromStr for RankingId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("optimal") {
            Ok(RankingId::Optimal)
        } else {
            s.parse().map(RankingId::Metric)
        }
    }
}

/// Per-user scores under one metric plus the derived total order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub id: RankingId,
    scores: BTreeMap<UserId, f64>,
    ranking: Vec<UserId>,
}

impl MetricTable {
    /// Ranks by score descending, user id ascending on ties.
    pub fn new(id: RankingId, scores: BTreeMap<UserId, f64>) -> Self {
        debug_assert!(scores.values().all(|s| s.is_finite() && *s >= 0.0));
        let mut ranking: Vec<&UserId> = scores.keys().collect();
        // keys are already ascending, so a stable sort on score keeps the tie-break
        ranking.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]));
        let ranking = ranking.into_iter().cloned().collect();
        MetricTable { id, scores, ranking }
    }

    pub fn scores(&self) -> &BTreeMap<UserId, f64> {
        &self.scores
    }

    pub fn ranking(&self) -> &[UserId] {
        &self.ranking
    }

    pub fn score(&self, user: &str) -> Option<f64> {
        self.scores.get(user).copied()
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    /// The same table limited to users accepted by `keep`; relative order is preserved.
    pub fn restricted(&self, keep: impl Fn(&str) -> bool) -> MetricTable {
        let scores = self
            .scores
            .iter()
            .filter(|(u, _)| keep(u))
            .map(|(u, s)| (u.clone(), *s))
            .collect();
        MetricTable::new(self.id, scores)
    }
}

/// Engagement score of a single tweet: the plain sum of its four counts.
pub fn engagement_score(retweets: u64, replies: u64, likes: u64, quotes: u64) -> u64 {
    retweets + replies + likes + quotes
}

/// Corpus-wide min/max of each base engagement count, over records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementRange {
    min: [u64; 4],
    max: [u64; 4],
}

fn base_counts(r: &RetweetRecord) -> [u64; 4] {
    [r.retweet_count, r.reply_count, r.like_count, r.quote_count]
}

impl EngagementRange {
    pub fn of(corpus: &Corpus) -> Self {
        let mut min = [u64::MAX; 4];
        let mut max = [0u64; 4];
        for r in corpus.records() {
            for (i, v) in base_counts(r).into_iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        if corpus.is_empty() {
            min = [0; 4];
        }
        EngagementRange { min, max }
    }

    /// Min-max normalized value of `value` for base kind index `i`; 0 when
    /// the corpus range is degenerate.
    fn normalize(&self, i: usize, value: u64) -> f64 {
        let span = self.max[i] - self.min[i];
        if span == 0 {
            0.0
        } else {
            (value.saturating_sub(self.min[i])) as f64 / span as f64
        }
    }

    fn normalized(&self, counts: [u64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| self.normalize(i, counts[i]))
    }
}

/// Per-record min-max normalized engagement: the four base kinds and
/// `NormalizedEngagementScore` (their sum).
pub fn normalized_engagements(corpus: &Corpus) -> Vec<BTreeMap<EngagementKind, f64>> {
    let range = EngagementRange::of(corpus);
    corpus
        .records()
        .iter()
        .map(|r| {
            let norm = range.normalized(base_counts(r));
            let mut m: BTreeMap<EngagementKind, f64> =
                EngagementKind::BASE.iter().copied().zip(norm).collect();
            m.insert(EngagementKind::NormalizedEngagementScore, norm.iter().sum());
            m
        })
        .collect()
}

/// A distinct original tweet reconstructed from its retweet records.
#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub counts: [u64; 4],
    /// Largest follower count among observed retweeters (0 if none).
    pub follower_weight: u64,
    pub records: usize,
}

impl Tweet {
    pub fn retweets(&self) -> u64 {
        self.counts[0]
    }

    fn value(&self, kind: EngagementKind, range: &EngagementRange) -> f64 {
        match kind {
            EngagementKind::EngagementScore => {
                let [rt, r, l, q] = self.counts;
                engagement_score(rt, r, l, q) as f64
            }
            EngagementKind::NormalizedEngagementScore => range.normalized(self.counts).iter().sum(),
            base => self.counts[base.index()] as f64,
        }
    }
}

/// Groups records into distinct tweets per original user. Tweets appear in
/// order of first occurrence.
pub fn reconstruct_tweets(corpus: &Corpus) -> BTreeMap<&str, Vec<Tweet>> {
    let mut slots: HashMap<(&str, &str), usize> = HashMap::new();
    let mut out: BTreeMap<&str, Vec<Tweet>> = BTreeMap::new();
    for r in corpus.records() {
        let author = r.original_user_id.as_str();
        let tweets = out.entry(author).or_default();
        let idx = *slots.entry((author, r.text.as_str())).or_insert_with(|| {
            tweets.push(Tweet {
                counts: [0; 4],
                follower_weight: 0,
                records: 0,
            });
            tweets.len() - 1
        });
        let t = &mut tweets[idx];
        for (slot, v) in t.counts.iter_mut().zip(base_counts(r)) {
            *slot = (*slot).max(v);
        }
        t.follower_weight = t.follower_weight.max(r.retweeter_followers);
        t.records += 1;
    }
    out
}

/// Largest `h` such that at least `h` tweets have at least `h` retweets.
pub fn h_index(retweet_counts: &[u64]) -> u64 {
    let mut sorted = retweet_counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|(i, &c)| c > *i as u64)
        .count() as u64
}

/// Largest `g` (at most the number of tweets) such that the `g` most
/// retweeted tweets together have at least `g²` retweets.
pub fn g_index(retweet_counts: &[u64]) -> u64 {
    let mut sorted = retweet_counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut cumulative: u128 = 0;
    let mut best = 0u64;
    for (i, &c) in sorted.iter().enumerate() {
        cumulative += c as u128;
        let g = i as u128 + 1;
        if cumulative >= g * g {
            best = g as u64;
        }
    }
    best
}

/// Activity period in 30-day months, counting the partial month (always ≥ 1).
pub fn activity_months(first_tweet_time: DateTime<Utc>, reference_time: DateTime<Utc>) -> i64 {
    let days = (reference_time - first_tweet_time).num_days().max(0);
    days / 30 + 1
}

/// H-index per month of activity.
pub fn m_index(h: u64, first_tweet_time: DateTime<Utc>, reference_time: DateTime<Utc>) -> f64 {
    h as f64 / activity_months(first_tweet_time, reference_time) as f64
}

fn family_score(family: Family, kind: EngagementKind, tweets: &[Tweet], range: &EngagementRange) -> f64 {
    let n = tweets.len() as f64;
    match family {
        Family::Aggregate => tweets.iter().map(|t| t.value(kind, range)).sum(),
        Family::PerTweet => family_score(Family::Aggregate, kind, tweets, range) / n,
        Family::FollowerWeightedAggregate => tweets
            .iter()
            .map(|t| t.value(kind, range) * t.follower_weight as f64)
            .sum(),
        Family::FollowerWeightedPerTweet => {
            family_score(Family::FollowerWeightedAggregate, kind, tweets, range) / n
        }
    }
}

fn user_score(metric: MetricId, user: &str, tweets: &[Tweet], corpus: &Corpus, range: &EngagementRange) -> f64 {
    let retweets = || tweets.iter().map(Tweet::retweets).collect::<Vec<_>>();
    match metric {
        MetricId::Family(f, k) => family_score(f, k, tweets, range),
        MetricId::HIndex => h_index(&retweets()) as f64,
        MetricId::GIndex => g_index(&retweets()) as f64,
        MetricId::MIndex => {
            let first = corpus
                .user(user)
                .map(|p| p.first_tweet_time)
                .unwrap_or_else(|| corpus.reference_time());
            m_index(h_index(&retweets()), first, corpus.reference_time())
        }
    }
}

/// One metric over every original user.
pub fn family_metric(corpus: &Corpus, family: Family, kind: EngagementKind) -> MetricTable {
    metric_table(corpus, MetricId::Family(family, kind))
}

pub fn metric_table(corpus: &Corpus, metric: MetricId) -> MetricTable {
    let range = EngagementRange::of(corpus);
    let tweets = reconstruct_tweets(corpus);
    let scores = tweets
        .iter()
        .map(|(u, ts)| (u.to_string(), user_score(metric, u, ts, corpus, &range)))
        .collect();
    MetricTable::new(RankingId::Metric(metric), scores)
}

/// All 27 metric tables. Users are scored in parallel; results do not
/// depend on the degree of parallelism.
pub fn compute_all_metrics(corpus: &Corpus) -> Result<BTreeMap<MetricId, MetricTable>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let range = EngagementRange::of(corpus);
    let tweets = reconstruct_tweets(corpus);
    let metrics = MetricId::all();

    let rows: Vec<(&str, Vec<f64>)> = tweets
        .par_iter()
        .map(|(u, ts)| {
            let row = metrics
                .iter()
                .map(|&m| user_score(m, u, ts, corpus, &range))
                .collect();
            (*u, row)
        })
        .collect();

    Ok(metrics
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let scores = rows.iter().map(|(u, row)| (u.to_string(), row[i])).collect();
            (m, MetricTable::new(RankingId::Metric(m), scores))
        })
        .collect())
}
