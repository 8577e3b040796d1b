//! Assignment of every profiled account to one of four analysis groups.

use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::{Corpus, UserId};
use crate::dismantling::{superspreader_cutoff, Rounding};
use crate::error::{Error, Result};
use crate::metrics::MetricTable;

pub const DEFAULT_BOT_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CohortLabel {
    BotSpreader,
    HumanSuperspreader,
    HumanSpreader,
    HumanNonSpreader,
}

impl CohortLabel {
    pub const ALL: [CohortLabel; 4] = [
        CohortLabel::BotSpreader,
        CohortLabel::HumanSuperspreader,
        CohortLabel::HumanSpreader,
        CohortLabel::HumanNonSpreader,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CohortLabel::BotSpreader => "bot_spreader",
            CohortLabel::HumanSuperspreader => "human_superspreader",
            CohortLabel::HumanSpreader => "human_spreader",
            CohortLabel::HumanNonSpreader => "human_non_spreader",
        }
    }
}

impl fmt::Display for CohortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CohortConfig {
    pub bot_threshold: f64,
    pub superspreader_fraction: f64,
    pub rounding: Rounding,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            bot_threshold: DEFAULT_BOT_THRESHOLD,
            superspreader_fraction: crate::dismantling::DEFAULT_SUPERSPREADER_FRACTION,
            rounding: Rounding::Ceil,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortAssignment {
    pub labels: BTreeMap<UserId, CohortLabel>,
    /// Users without a bot score, classified as human.
    pub missing_bot_score: usize,
}

impl CohortAssignment {
    pub fn members(&self, label: CohortLabel) -> impl Iterator<Item = &str> {
        self.labels
            .iter()
            .filter(move |(_, l)| **l == label)
            .map(|(u, _)| u.as_str())
    }

    pub fn count(&self, label: CohortLabel) -> usize {
        self.members(label).count()
    }

    pub fn label(&self, user: &str) -> Option<CohortLabel> {
        self.labels.get(user).copied()
    }
}

/// Labels every user in `corpus`, in precedence order: bot spreaders
/// (bot score strictly above the threshold and at least one conspiracy
/// tweet), then the top fraction of `hindex_ranking` among accounts at or
/// below the bot threshold, then remaining accounts with conspiracy tweets,
/// then everyone else. A missing bot score counts as 0.
pub fn classify(corpus: &Corpus, hindex_ranking: &MetricTable, config: &CohortConfig) -> Result<CohortAssignment> {
    if !(0.0..=1.0).contains(&config.bot_threshold) {
        return Err(Error::ThresholdOutOfRange {
            name: "bot_threshold",
            value: config.bot_threshold,
        });
    }
    let users = corpus.users();
    let is_bot = |u: &str| users.get(u).and_then(|p| p.bot_score).unwrap_or(0.0) > config.bot_threshold;
    let mut missing_bot_score = 0;
    let mut labels = BTreeMap::new();
    for (id, profile) in users {
        if profile.bot_score.is_none() {
            missing_bot_score += 1;
        }
        if is_bot(id) && profile.conspiracy_tweet_count >= 1 {
            labels.insert(id.clone(), CohortLabel::BotSpreader);
        }
    }
    if missing_bot_score > 0 {
        log::info!("{missing_bot_score} users have no bot score and are treated as human");
    }

    let humans = hindex_ranking.restricted(|u| users.contains_key(u) && !is_bot(u));
    for u in superspreader_cutoff(&humans, config.superspreader_fraction, config.rounding)? {
        labels.insert(u, CohortLabel::HumanSuperspreader);
    }

    for (id, profile) in users {
        labels.entry(id.clone()).or_insert(if profile.conspiracy_tweet_count >= 1 {
            CohortLabel::HumanSpreader
        } else {
            CohortLabel::HumanNonSpreader
        });
    }
    Ok(CohortAssignment {
        labels,
        missing_bot_score,
    })
}
