//! Retweet data model, ingestion and preprocessing.
//!
//! Input is either newline-delimited JSON (one object per line) or a
//! comma-separated table with a header row. Both carry the same field
//! names. Ingestion is a single sequential pass: completeness filter,
//! then dedup, then (optionally, via [`filter_conspiracy`]) the
//! conspiracy-author filter.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use regex::Regex;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type UserId = String;

/// Default probability a tweet must exceed to count as conspiracy-endorsing.
pub const DEFAULT_CONSPIRACY_THRESHOLD: f64 = 0.9;

/// Ekman's six basic emotions plus neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Neutral,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown emotion label {s:?}")))
    }
}

/// One retweet event: `retweeter_id` retweeted a tweet authored by
/// `original_user_id`. Engagement counts describe the original tweet.
///
/// Field order here is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetweetRecord {
    pub record_id: String,
    pub retweeter_id: UserId,
    pub original_user_id: UserId,
    #[serde(serialize_with = "serialize_timestamp")]
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub retweet_count: u64,
    pub reply_count: u64,
    pub like_count: u64,
    pub quote_count: u64,
    pub retweeter_followers: u64,
    pub has_media: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conspiracy_prob: Option<f64>,
    /// Bot score of the original tweeter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentiment_compound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emotion_label: Option<Emotion>,
}

fn serialize_timestamp<S: Serializer>(ts: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_timestamp(ts))
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: UserId,
    /// Largest follower count observed while the account acted as a retweeter.
    pub follower_count: u64,
    pub bot_score: Option<f64>,
    pub first_tweet_time: DateTime<Utc>,
    /// Distinct authored tweets whose conspiracy probability exceeds the
    /// corpus tally threshold.
    pub conspiracy_tweet_count: u64,
}

/// An immutable, analysis-ready retweet dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<RetweetRecord>,
    users: BTreeMap<UserId, UserProfile>,
    reference_time: DateTime<Utc>,
    conspiracy_threshold: f64,
}

impl Corpus {
    /// Builds a corpus from already-validated records, deriving user
    /// profiles. `conspiracy_threshold` only affects the per-user tally.
    pub fn from_records(records: Vec<RetweetRecord>, conspiracy_threshold: f64) -> Result<Self> {
        check_unit("conspiracy_threshold", conspiracy_threshold)?;
        let reference_time = records
            .iter()
            .map(|r| r.timestamp)
            .max()
            .ok_or(Error::EmptyCorpus)?;

        let mut users: BTreeMap<UserId, UserProfile> = BTreeMap::new();
        let mut conspiracy_tweets: HashSet<(&str, &str)> = HashSet::new();
        for r in &records {
            for id in [&r.original_user_id, &r.retweeter_id] {
                let profile = users.entry(id.clone()).or_insert_with(|| UserProfile {
                    user_id: id.clone(),
                    follower_count: 0,
                    bot_score: None,
                    first_tweet_time: r.timestamp,
                    conspiracy_tweet_count: 0,
                });
                profile.first_tweet_time = profile.first_tweet_time.min(r.timestamp);
            }
            let retweeter = users.get_mut(&r.retweeter_id).expect("inserted above");
            retweeter.follower_count = retweeter.follower_count.max(r.retweeter_followers);

            let author = users.get_mut(&r.original_user_id).expect("inserted above");
            if let Some(b) = r.bot_score {
                author.bot_score = Some(author.bot_score.map_or(b, |old| old.max(b)));
            }
            if r.conspiracy_prob.is_some_and(|p| p > conspiracy_threshold)
                && conspiracy_tweets.insert((&r.original_user_id, &r.text))
            {
                author.conspiracy_tweet_count += 1;
            }
        }

        Ok(Corpus {
            records,
            users,
            reference_time,
            conspiracy_threshold,
        })
    }

    pub fn records(&self) -> &[RetweetRecord] {
        &self.records
    }

    pub fn users(&self) -> &BTreeMap<UserId, UserProfile> {
        &self.users
    }

    pub fn user(&self, id: &str) -> Option<&UserProfile> {
        self.users.get(id)
    }

    pub fn reference_time(&self) -> DateTime<Utc> {
        self.reference_time
    }

    pub fn conspiracy_threshold(&self) -> f64 {
        self.conspiracy_threshold
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Original tweeters in ascending id order.
    pub fn original_users(&self) -> Vec<&str> {
        let set: std::collections::BTreeSet<&str> =
            self.records.iter().map(|r| r.original_user_id.as_str()).collect();
        set.into_iter().collect()
    }

    /// Number of records authored by each original tweeter.
    pub fn contributions(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.original_user_id.as_str()).or_insert(0) += 1;
        }
        out
    }

    /// Records grouped by original tweeter, preserving corpus order.
    pub fn records_by_author(&self) -> BTreeMap<&str, Vec<&RetweetRecord>> {
        let mut out: BTreeMap<&str, Vec<&RetweetRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.original_user_id.as_str()).or_default().push(r);
        }
        out
    }

    /// Serializes the corpus as newline-delimited JSON in canonical field order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(|e| Error::io("<corpus>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ThresholdOutOfRange { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    JsonLines,
    Csv,
}

impl InputFormat {
    /// `.csv` files are tabular; everything else is read as JSON lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::JsonLines,
        }
    }
}

/// Per-stage counts from one ingestion pass. Every line read lands in
/// exactly one bucket.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub records_read: usize,
    pub malformed: usize,
    pub non_retweet: usize,
    pub invalid_timestamp: usize,
    pub incomplete: usize,
    pub duplicates: usize,
    pub retained: usize,
}

impl IngestSummary {
    pub fn dropped(&self) -> usize {
        self.malformed + self.non_retweet + self.invalid_timestamp + self.incomplete
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    pub summary: IngestSummary,
    /// Line-numbered messages for rejected records.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub conspiracy_threshold: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            conspiracy_threshold: DEFAULT_CONSPIRACY_THRESHOLD,
        }
    }
}

/// A field value as it appeared in the input, before typing.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Str(String),
    Num(f64),
    Bool(bool),
}

/// One untyped input record with its 1-based line number.
#[derive(Debug, Clone, Default)]
pub struct RawRecord {
    pub line: usize,
    pub fields: HashMap<String, RawValue>,
}

/// Outcome of typing a single raw record.
enum Parsed {
    Ok(Box<RetweetRecord>, Option<String>),
    Malformed(String),
    NonRetweet,
    InvalidTimestamp(String),
    Incomplete(&'static str),
}

static MIN_TIMESTAMP: LazyLock<DateTime<Utc>> =
    LazyLock::new(|| Utc.with_ymd_and_hms(2000, 1, 1, 0, 0, 0).unwrap());

/// Parses an ISO-8601 instant, truncated to whole seconds. Inputs without
/// an offset are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    let ts = if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        t.with_timezone(&Utc)
    } else {
        let naive = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())?;
        Utc.from_utc_datetime(&naive)
    };
    DateTime::from_timestamp(ts.timestamp(), 0)
}

fn text_digest(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl RawRecord {
    fn str_field(&self, name: &str) -> std::result::Result<Option<String>, String> {
        match self.fields.get(name) {
            None => Ok(None),
            Some(RawValue::Str(s)) if s.is_empty() => Ok(None),
            Some(RawValue::Str(s)) => Ok(Some(s.clone())),
            Some(RawValue::Num(n)) if n.fract() == 0.0 && n.is_finite() => Ok(Some(format!("{}", *n as i64))),
            Some(other) => Err(format!("field {name}: expected string, got {other:?}")),
        }
    }

    fn count_field(&self, name: &str) -> std::result::Result<Option<u64>, String> {
        let bad = || format!("field {name}: expected non-negative integer");
        match self.fields.get(name) {
            None => Ok(None),
            Some(RawValue::Str(s)) if s.trim().is_empty() => Ok(None),
            Some(RawValue::Str(s)) => s.trim().parse::<u64>().map(Some).map_err(|_| bad()),
            Some(RawValue::Num(n)) if *n >= 0.0 && n.fract() == 0.0 && *n <= u64::MAX as f64 => Ok(Some(*n as u64)),
            Some(_) => Err(bad()),
        }
    }

    fn real_field(&self, name: &str, lo: f64, hi: f64) -> std::result::Result<Option<f64>, String> {
        let v = match self.fields.get(name) {
            None => return Ok(None),
            Some(RawValue::Str(s)) if s.trim().is_empty() => return Ok(None),
            Some(RawValue::Str(s)) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("field {name}: expected number"))?,
            Some(RawValue::Num(n)) => *n,
            Some(RawValue::Bool(_)) => return Err(format!("field {name}: expected number")),
        };
        if (lo..=hi).contains(&v) {
            Ok(Some(v))
        } else {
            Err(format!("field {name}: {v} outside [{lo}, {hi}]"))
        }
    }

    fn bool_field(&self, name: &str) -> std::result::Result<Option<bool>, String> {
        match self.fields.get(name) {
            None => Ok(None),
            Some(RawValue::Bool(b)) => Ok(Some(*b)),
            Some(RawValue::Num(n)) if *n == 0.0 || *n == 1.0 => Ok(Some(*n == 1.0)),
            Some(RawValue::Str(s)) => match s.trim().to_ascii_lowercase().as_str() {
                "" => Ok(None),
                "true" | "1" => Ok(Some(true)),
                "false" | "0" => Ok(Some(false)),
                _ => Err(format!("field {name}: expected boolean")),
            },
            Some(_) => Err(format!("field {name}: expected boolean")),
        }
    }

    fn parse(&self) -> Parsed {
        match self.try_parse() {
            Ok(p) => p,
            Err(msg) => Parsed::Malformed(msg),
        }
    }

    fn try_parse(&self) -> std::result::Result<Parsed, String> {
        let retweeter_id = match self.str_field("retweeter_id")? {
            Some(id) => id,
            None => return Ok(Parsed::NonRetweet),
        };
        let original_user_id = self
            .str_field("original_user_id")?
            .ok_or("field original_user_id: missing")?;

        let raw_ts = self.str_field("timestamp")?.unwrap_or_default();
        let timestamp = match parse_timestamp(&raw_ts) {
            Some(t) if t >= *MIN_TIMESTAMP => t,
            _ => return Ok(Parsed::InvalidTimestamp(raw_ts)),
        };

        let text = self.str_field("text")?.unwrap_or_default();
        let counts = [
            ("retweet_count", self.count_field("retweet_count")?),
            ("reply_count", self.count_field("reply_count")?),
            ("like_count", self.count_field("like_count")?),
            ("quote_count", self.count_field("quote_count")?),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| v.is_none()) {
            return Ok(Parsed::Incomplete(name));
        }
        let [rt, rp, lk, qt] = counts.map(|(_, v)| v.unwrap());

        let emotion_label = match self.str_field("emotion_label")? {
            Some(s) => Some(s.parse::<Emotion>().map_err(|e| e.to_string())?),
            None => None,
        };

        let provided_id = self.str_field("record_id")?;
        let dedup_key = provided_id.is_none().then(|| {
            format!("{retweeter_id}\u{1f}{original_user_id}\u{1f}{}\u{1f}{text}", timestamp.timestamp())
        });
        let record_id = provided_id.unwrap_or_else(|| {
            format!(
                "{retweeter_id}-{original_user_id}-{}-{}",
                timestamp.timestamp(),
                text_digest(&text)
            )
        });

        let record = RetweetRecord {
            record_id,
            retweeter_id,
            original_user_id,
            timestamp,
            text,
            retweet_count: rt,
            reply_count: rp,
            like_count: lk,
            quote_count: qt,
            retweeter_followers: self.count_field("retweeter_followers")?.unwrap_or(0),
            has_media: self.bool_field("has_media")?.unwrap_or(false),
            conspiracy_prob: self.real_field("conspiracy_prob", 0.0, 1.0)?,
            bot_score: self.real_field("bot_score", 0.0, 1.0)?,
            sentiment_compound: self.real_field("sentiment_compound", -1.0, 1.0)?,
            toxicity: self.real_field("toxicity", 0.0, 1.0)?,
            emotion_label,
        };
        Ok(Parsed::Ok(Box::new(record), dedup_key))
    }
}

/// Folds a stream of raw records (or per-line parse failures) into a corpus.
///
/// Order: completeness filter, then dedup (first occurrence wins).
pub fn ingest<I>(stream: I, options: IngestOptions) -> Result<Ingested>
where
    I: IntoIterator<Item = std::result::Result<RawRecord, (usize, String)>>,
{
    let mut summary = IngestSummary::default();
    let mut diagnostics = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut seen_keys: HashSet<String> = HashSet::new();
    let mut records = Vec::new();

    for item in stream {
        summary.records_read += 1;
        let raw = match item {
            Ok(raw) => raw,
            Err((line, msg)) => {
                summary.malformed += 1;
                diagnostics.push(format!("line {line}: malformed record: {msg}"));
                continue;
            }
        };
        match raw.parse() {
            Parsed::Malformed(msg) => {
                summary.malformed += 1;
                diagnostics.push(format!("line {}: malformed record: {msg}", raw.line));
            }
            Parsed::NonRetweet => summary.non_retweet += 1,
            Parsed::InvalidTimestamp(ts) => {
                summary.invalid_timestamp += 1;
                diagnostics.push(format!("line {}: unparseable timestamp {ts:?}", raw.line));
            }
            Parsed::Incomplete(field) => {
                summary.incomplete += 1;
                diagnostics.push(format!("line {}: incomplete record, missing {field}", raw.line));
            }
            Parsed::Ok(record, dedup_key) => {
                let fresh = match dedup_key {
                    Some(key) => seen_keys.insert(key) && seen_ids.insert(record.record_id.clone()),
                    None => seen_ids.insert(record.record_id.clone()),
                };
                if fresh {
                    records.push(*record);
                } else {
                    summary.duplicates += 1;
                }
            }
        }
    }

    summary.retained = records.len();
    let corpus = Corpus::from_records(records, options.conspiracy_threshold)?;
    Ok(Ingested {
        corpus,
        summary,
        diagnostics,
    })
}

fn json_line_to_raw(line_no: usize, line: &str) -> std::result::Result<RawRecord, (usize, String)> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| (line_no, e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| (line_no, "expected a JSON object".to_string()))?;
    let mut fields = HashMap::with_capacity(obj.len());
    for (k, v) in obj {
        let raw = match v {
            serde_json::Value::Null => continue,
            serde_json::Value::String(s) => RawValue::Str(s.clone()),
            serde_json::Value::Number(n) => RawValue::Num(n.as_f64().unwrap_or(f64::NAN)),
            serde_json::Value::Bool(b) => RawValue::Bool(*b),
            _ => return Err((line_no, format!("field {k}: nested values are not supported"))),
        };
        fields.insert(k.clone(), raw);
    }
    Ok(RawRecord { line: line_no, fields })
}

/// Reads newline-delimited JSON records. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> impl Iterator<Item = std::result::Result<RawRecord, (usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        match line {
            Err(e) => Some(Err((line_no, e.to_string()))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(json_line_to_raw(line_no, &l)),
        }
    })
}

/// Reads a header-led comma-separated table.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<std::result::Result<RawRecord, (usize, String)>>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        // header is line 1
        let line_no = i + 2;
        match row {
            Err(e) => out.push(Err((line_no, e.to_string()))),
            Ok(row) => {
                let fields = headers
                    .iter()
                    .zip(row.iter())
                    .map(|(h, v)| (h.trim().to_string(), RawValue::Str(v.to_string())))
                    .collect();
                out.push(Ok(RawRecord { line: line_no, fields }));
            }
        }
    }
    Ok(out)
}

pub fn ingest_reader<R: Read>(reader: R, format: InputFormat, options: IngestOptions) -> Result<Ingested> {
    match format {
        InputFormat::JsonLines => ingest(read_jsonl(BufReader::new(reader)), options),
        InputFormat::Csv => ingest(read_csv(reader)?, options),
    }
}

pub fn ingest_path(path: &Path, options: IngestOptions) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, InputFormat::from_path(path), options)
}

/// Keeps every record of original tweeters who authored at least one
/// record with `conspiracy_prob > threshold`.
pub fn filter_conspiracy(corpus: &Corpus, threshold: f64) -> Result<Corpus> {
    check_unit("conspiracy_threshold", threshold)?;
    if corpus.records.iter().all(|r| r.conspiracy_prob.is_none()) {
        return Err(Error::NoClassifierScores);
    }
    let endorsers: HashSet<&str> = corpus
        .records
        .iter()
        .filter(|r| r.conspiracy_prob.is_some_and(|p| p > threshold))
        .map(|r| r.original_user_id.as_str())
        .collect();
    let kept: Vec<RetweetRecord> = corpus
        .records
        .iter()
        .filter(|r| endorsers.contains(r.original_user_id.as_str()))
        .cloned()
        .collect();
    Corpus::from_records(kept, threshold)
}

static MENTION_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^@[A-Za-z0-9_]{1,15}\p{P}*$").unwrap());
static RT_MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^@[A-Za-z0-9_]{1,15}:?$").unwrap());

pub(crate) fn is_url_token(tok: &str) -> bool {
    let lower = tok.get(..8).unwrap_or(tok).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

pub(crate) fn is_mention_token(tok: &str) -> bool {
    MENTION_TOKEN.is_match(tok)
}

/// Strips a leading retweet tag, URLs and @-mentions; keeps hashtags and
/// collapses whitespace.
pub fn clean_text(text: &str) -> String {
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() >= 2 && tokens[0].eq_ignore_ascii_case("rt") && RT_MENTION.is_match(tokens[1]) {
        tokens.drain(..2);
    }
    tokens
        .into_iter()
        .filter(|t| !is_url_token(t) && !is_mention_token(t))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(id: &str, user: &str, prob: Option<f64>) -> String {
        let mut v = serde_json::json!({
            "record_id": id, "retweeter_id": format!("rt_{id}"), "original_user_id": user,
            "timestamp": "2020-03-01T12:00:00Z", "text": format!("tweet by {user}"),
            "retweet_count": 3, "reply_count": 1, "like_count": 5, "quote_count": 0,
            "retweeter_followers": 10, "has_media": false
        });
        if let Some(p) = prob {
            v["conspiracy_prob"] = p.into();
        }
        v.to_string()
    }

    fn ingest_lines(lines: &[String]) -> Result<Ingested> {
        let body = lines.join("\n");
        ingest_reader(body.as_bytes(), InputFormat::JsonLines, IngestOptions::default())
    }

    #[test]
    fn incomplete_record_is_dropped() {
        let mut lines: Vec<String> = (0..3).map(|i| line(&i.to_string(), "a", None)).collect();
        let mut v: serde_json::Value = serde_json::from_str(&line("x", "a", None)).unwrap();
        v.as_object_mut().unwrap().remove("like_count");
        lines.push(v.to_string());
        let out = ingest_lines(&lines).unwrap();
        assert_eq!(out.corpus.len(), 3);
        assert_eq!(out.summary.incomplete, 1);
        assert_eq!(out.summary.dropped(), 1);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(ingest_lines(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn duplicate_record_ids_are_collapsed() {
        let lines = vec![line("1", "a", None), line("1", "a", None)];
        let out = ingest_lines(&lines).unwrap();
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.summary.duplicates, 1);
    }

    #[test]
    fn composite_key_dedups_when_record_id_missing() {
        let mut v: serde_json::Value = serde_json::from_str(&line("1", "a", None)).unwrap();
        v.as_object_mut().unwrap().remove("record_id");
        let l = v.to_string();
        let out = ingest_lines(&[l.clone(), l]).unwrap();
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.summary.duplicates, 1);
        assert!(out.corpus.records()[0].record_id.starts_with("rt_1-a-"));
    }

    #[test]
    fn bad_timestamp_is_rejected_with_line_number() {
        let mut v: serde_json::Value = serde_json::from_str(&line("2", "a", None)).unwrap();
        v["timestamp"] = "yesterday".into();
        let out = ingest_lines(&[line("1", "a", None), v.to_string()]).unwrap();
        assert_eq!(out.summary.invalid_timestamp, 1);
        assert!(out.diagnostics[0].starts_with("line 2:"), "{:?}", out.diagnostics);
    }

    #[test]
    fn pre_2000_timestamp_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&line("2", "a", None)).unwrap();
        v["timestamp"] = "1999-12-31T23:59:59Z".into();
        let out = ingest_lines(&[line("1", "a", None), v.to_string()]).unwrap();
        assert_eq!(out.summary.invalid_timestamp, 1);
    }

    #[test]
    fn malformed_lines_are_counted() {
        let out = ingest_lines(&[line("1", "a", None), "{not json".into(), "[1,2]".into()]).unwrap();
        assert_eq!(out.summary.malformed, 2);
        assert_eq!(out.summary.retained, 1);
    }

    #[test]
    fn negative_count_is_malformed() {
        let mut v: serde_json::Value = serde_json::from_str(&line("2", "a", None)).unwrap();
        v["like_count"] = (-1).into();
        let out = ingest_lines(&[line("1", "a", None), v.to_string()]).unwrap();
        assert_eq!(out.summary.malformed, 1);
    }

    #[test]
    fn csv_variant_matches_jsonl() {
        let csv = "record_id,retweeter_id,original_user_id,timestamp,text,retweet_count,reply_count,like_count,quote_count,retweeter_followers,has_media,conspiracy_prob\n\
                   1,rt_1,a,2020-03-01T12:00:00Z,tweet by a,3,1,5,0,10,false,0.95\n\
                   2,rt_2,a,2020-03-01T12:00:00Z,tweet by a,3,1,5,0,10,false,\n";
        let from_csv = ingest_reader(csv.as_bytes(), InputFormat::Csv, IngestOptions::default()).unwrap();
        let from_json = ingest_lines(&[line("1", "a", Some(0.95)), line("2", "a", None)]).unwrap();
        assert_eq!(from_csv.corpus, from_json.corpus);
    }

    #[test]
    fn reingest_of_serialized_corpus_is_identical() {
        let out = ingest_lines(&[line("1", "a", Some(0.95)), line("2", "b", Some(0.3))]).unwrap();
        let text = out.corpus.to_jsonl_string();
        let again = ingest_reader(text.as_bytes(), InputFormat::JsonLines, IngestOptions::default()).unwrap();
        assert_eq!(again.corpus, out.corpus);
        assert_eq!(again.corpus.to_jsonl_string(), text);
    }

    #[test]
    fn profiles_cover_both_roles() {
        let out = ingest_lines(&[line("1", "a", None)]).unwrap();
        let c = &out.corpus;
        assert!(c.user("a").is_some());
        assert_eq!(c.user("rt_1").unwrap().follower_count, 10);
        assert_eq!(c.reference_time(), parse_timestamp("2020-03-01T12:00:00Z").unwrap());
    }

    #[test]
    fn filter_keeps_every_record_of_endorsing_authors() {
        let lines = vec![
            line("1", "A", Some(0.95)),
            line("2", "A", Some(0.2)),
            line("3", "B", Some(0.5)),
        ];
        let c = ingest_lines(&lines).unwrap().corpus;
        let f = filter_conspiracy(&c, 0.9).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.records().iter().all(|r| r.original_user_id == "A"));
        assert!(f.user("B").is_none());
        assert!(f.user("rt_3").is_none());
        assert_eq!(f.user("A").unwrap().conspiracy_tweet_count, 1);
    }

    #[test]
    fn filter_threshold_boundaries() {
        let lines = vec![line("1", "A", Some(0.1)), line("2", "B", Some(0.0)), line("3", "C", Some(0.9))];
        let c = ingest_lines(&lines).unwrap().corpus;
        let f = filter_conspiracy(&c, 0.0).unwrap();
        assert_eq!(f.original_users(), vec!["A", "C"]);
        // strict comparison: 0.9 does not exceed 0.9
        let f = filter_conspiracy(&c, 0.5).unwrap();
        assert_eq!(f.original_users(), vec!["C"]);
        assert!(matches!(filter_conspiracy(&c, 0.9), Err(Error::EmptyCorpus)));
        assert!(matches!(filter_conspiracy(&c, 1.0), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn filter_without_scores_errors() {
        let c = ingest_lines(&[line("1", "A", None)]).unwrap().corpus;
        assert!(matches!(filter_conspiracy(&c, 0.9), Err(Error::NoClassifierScores)));
        assert!(matches!(filter_conspiracy(&c, 1.5), Err(Error::ThresholdOutOfRange { .. })));
    }

    #[test]
    fn clean_text_examples() {
        assert_eq!(clean_text("RT @foo: Wake up https://t.co/x #hoax"), "Wake up #hoax");
        assert_eq!(clean_text("#a #b"), "#a #b");
        assert_eq!(clean_text("@a @b https://x.y"), "");
        assert_eq!(clean_text("  spaced\t\tout \n text "), "spaced out text");
        assert_eq!(clean_text("see www.example.com now"), "see now");
    }

    proptest! {
        #[test]
        fn clean_text_is_idempotent(s in "((RT|rt|@[a-z_]{1,18}:?|https?://[a-z.]{1,6}|www\\.x|#[a-z]{1,4}|[A-Za-z!?.,:]{1,6}|\\PC{1,3})[ \t\n]{0,2}){0,10}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
        }
    }
}
