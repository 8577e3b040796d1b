//! Dismantling analysis: remove original tweeters in ranking order and
//! track how much of the retweet dataset remains.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::{Corpus, UserId};
use crate::error::{Error, Result};
use crate::metrics::{MetricTable, RankingId};
use crate::stats::{cvm_two_sample, TestResult};

pub const DEFAULT_SUPERSPREADER_FRACTION: f64 = 0.001;

/// Remaining record volume after removing the top-k ranked users, for
/// every k from 0 to the number of ranked users.
#[derive(Debug, Clone, PartialEq)]
pub struct DismantlingCurve {
    pub id: RankingId,
    pub total_records: usize,
    /// `(removed_users, remaining_records)`, starting at `(0, total_records)`.
    pub points: Vec<(usize, usize)>,
}

impl DismantlingCurve {
    pub fn remaining(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|&(_, r)| r)
    }

    pub fn remaining_at(&self, removed: usize) -> Option<usize> {
        self.points.get(removed).map(|&(_, r)| r)
    }

    /// Fraction of records removed after `removed` users are gone.
    pub fn removed_fraction(&self, removed: usize) -> Option<f64> {
        self.remaining_at(removed)
            .map(|r| (self.total_records - r) as f64 / self.total_records as f64)
    }
}

/// Share of the dataset authored by each original user.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactReport(pub BTreeMap<UserId, f64>);

impl ImpactReport {
    pub fn of(corpus: &Corpus) -> Self {
        let total = corpus.len() as f64;
        ImpactReport(
            corpus
                .contributions()
                .into_iter()
                .map(|(u, n)| (u.to_string(), n as f64 / total))
                .collect(),
        )
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }
}

/// Fraction of all records that disappear when `user` is removed.
pub fn impact(corpus: &Corpus, user: &str) -> Result<f64> {
    let n = corpus
        .records()
        .iter()
        .filter(|r| r.original_user_id == user)
        .count();
    if n == 0 {
        return Err(Error::UnknownOriginalUser(user.to_string()));
    }
    Ok(n as f64 / corpus.len() as f64)
}

/// Ranks original users by how many records they contributed. This is the
/// best achievable ranking: no other order leaves fewer records after any
/// number of removals.
pub fn optimal_ranking(corpus: &Corpus) -> MetricTable {
    let scores = corpus
        .contributions()
        .into_iter()
        .map(|(u, n)| (u.to_string(), n as f64))
        .collect();
    MetricTable::new(RankingId::Optimal, scores)
}

pub fn dismantle(corpus: &Corpus, ranking: &MetricTable) -> Result<DismantlingCurve> {
    let contributions = corpus.contributions();
    let ranked: HashSet<&str> = ranking.ranking().iter().map(String::as_str).collect();
    if let Some(missing) = contributions.keys().find(|u| !ranked.contains(**u)) {
        return Err(Error::RankingIncomplete(missing.to_string()));
    }

    let total = corpus.len();
    let mut remaining = total;
    let mut points = Vec::with_capacity(ranking.len() + 1);
    points.push((0, total));
    for (k, user) in ranking.ranking().iter().enumerate() {
        let removed = *contributions
            .get(user.as_str())
            .ok_or_else(|| Error::UnknownOriginalUser(user.clone()))?;
        remaining -= removed;
        points.push((k + 1, remaining));
    }
    Ok(DismantlingCurve {
        id: ranking.id,
        total_records: total,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    Ceil,
    Floor,
}

impl std::str::FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ceil" => Ok(Rounding::Ceil),
            "floor" => Ok(Rounding::Floor),
            other => Err(Error::InvalidInput(format!("rounding must be ceil or floor, got {other:?}"))),
        }
    }
}

pub fn cutoff_size(user_count: usize, fraction: f64, rounding: Rounding) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::FractionOutOfRange(fraction));
    }
    // guard against 0.001 * 1000 landing a hair above 1
    let exact = user_count as f64 * fraction;
    let snapped = if (exact - exact.round()).abs() < 1e-9 { exact.round() } else { exact };
    let n = match rounding {
        Rounding::Ceil => snapped.ceil(),
        Rounding::Floor => snapped.floor(),
    };
    Ok((n as usize).min(user_count))
}

/// The top `fraction` of a ranking, in rank order.
pub fn superspreader_cutoff(ranking: &MetricTable, fraction: f64, rounding: Rounding) -> Result<Vec<UserId>> {
    let n = cutoff_size(ranking.len(), fraction, rounding)?;
    Ok(ranking.ranking()[..n].to_vec())
}

/// `remaining_a - remaining_b` at each removal count both curves cover.
pub fn curve_difference(a: &DismantlingCurve, b: &DismantlingCurve) -> Result<Vec<(usize, i64)>> {
    if a.total_records != b.total_records {
        return Err(Error::CurveMismatch(a.total_records, b.total_records));
    }
    Ok(a
        .points
        .iter()
        .zip(&b.points)
        .map(|(&(k, ra), &(_, rb))| (k, ra as i64 - rb as i64))
        .collect())
}

/// Two-sample Cramér–von Mises comparison of the remaining-volume values of
/// two curves over the first `window` removals (all points when `None`).
pub fn compare_curves(a: &DismantlingCurve, b: &DismantlingCurve, window: Option<usize>) -> Result<TestResult> {
    if a.total_records != b.total_records {
        return Err(Error::CurveMismatch(a.total_records, b.total_records));
    }
    let take = |c: &DismantlingCurve| -> Vec<f64> {
        let n = window.map_or(c.points.len(), |w| (w + 1).min(c.points.len()));
        c.remaining().take(n).map(|r| r as f64).collect()
    };
    cvm_two_sample(&take(a), &take(b))
}
