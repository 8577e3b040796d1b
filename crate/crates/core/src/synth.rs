//! Seeded synthetic retweet corpora for fixtures and benchmarks.
//!
//! Original tweeters receive Zipf-shaped tweet counts: the user at
//! popularity rank `k` authors `max(1, floor(max_tweets / k^exponent))`
//! tweets, so an exponent of 0 gives every user the same count. Engagement
//! is log-normal per tweet and scaled by a log-normal user reach, which gives
//! the heavy tail seen in real retweet data.

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::corpus::{Corpus, Emotion, RetweetRecord, DEFAULT_CONSPIRACY_THRESHOLD};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Number of distinct original tweeters.
    pub users: usize,
    pub zipf_exponent: f64,
    /// Tweet count of the most prolific user.
    pub max_tweets: u32,
    /// Size of the retweeter pool; 0 means twice the user count.
    pub retweeters: usize,
    pub bot_fraction: f64,
    /// Share of original users that ever post conspiracy content.
    pub spreader_fraction: f64,
    pub seed: u64,
    /// Truncate the output to this many records.
    pub max_records: Option<usize>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 1000,
            zipf_exponent: 1.5,
            max_tweets: 60,
            retweeters: 0,
            bot_fraction: 0.13,
            spreader_fraction: 0.7,
            seed: 42,
            max_records: None,
        }
    }
}

const WORDS: &[&str] = &[
    "people", "trump", "virus", "vaccine", "truth", "media", "government", "lockdown", "masks", "china",
    "democrats", "police", "president", "freedom", "doctors", "hospital", "numbers", "lies", "america",
    "cure", "plan", "control", "wake", "fake", "news", "deep", "state", "gates", "testing", "school",
    "economy", "riots", "antifa", "biden", "election", "black", "history", "evidence", "question",
    "everyone", "nobody", "believe", "happening", "remember", "share", "watch", "before", "deleted",
    "unbelievable", "information", "pandemic", "experts", "official", "narrative",
];

const HASHTAGS: &[&str] = &[
    "covid19", "coronavirus", "qanon", "wwg1wga", "maga", "trump2020", "kag", "plandemic", "coronahoax",
    "virushoax", "blacklivesmatter", "blm", "obamagate", "antifa", "mog", "breaking", "foxnews",
    "resist", "bidenharris2020", "filmyourhospital", "covid", "trump", "fact", "news",
];

const EMOJIS: &[&str] = &["\u{1F621}", "\u{1F602}", "\u{1F914}", "\u{1F1FA}\u{1F1F8}", "\u{2757}", "\u{1F680}"];

struct Author {
    id: String,
    tweets: u32,
    reach: f64,
    bot_score: Option<f64>,
    bot: bool,
    spreader: bool,
    start_day: i64,
}

fn sentence<R: Rng>(rng: &mut R, caps: bool) -> String {
    let n = rng.random_range(3..12);
    let mut words: Vec<String> = (0..n)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
        .collect();
    if caps {
        let i = rng.random_range(0..words.len());
        words[i] = words[i].to_uppercase();
    }
    let mut s = words.join(" ");
    let mut chars = s.chars();
    if let Some(first) = chars.next() {
        s = first.to_uppercase().chain(chars).collect();
    }
    let end = match rng.random_range(0..10) {
        0 | 1 => "!",
        2 => "?",
        _ => ".",
    };
    s + end
}

fn tweet_text<R: Rng>(rng: &mut R, author: &Author) -> String {
    let mut parts = Vec::new();
    if rng.random_bool(if author.bot { 0.5 } else { 0.2 }) {
        parts.push(format!("@user{}", rng.random_range(0..500)));
    }
    let caps = rng.random_bool(if author.bot { 0.08 } else { 0.01 });
    for i in 0..rng.random_range(1..4) {
        parts.push(sentence(rng, caps && i == 0));
    }
    if rng.random_bool(if author.bot { 0.25 } else { 0.08 }) {
        parts.push(EMOJIS[rng.random_range(0..EMOJIS.len())].to_string());
    }
    let tags = if author.bot { rng.random_range(0..5) } else { rng.random_range(0..3) };
    for _ in 0..tags {
        let mut tag = HASHTAGS[rng.random_range(0..HASHTAGS.len())].to_string();
        if rng.random_bool(0.2) {
            tag = tag.to_uppercase();
        }
        parts.push(format!("#{tag}"));
    }
    if rng.random_bool(0.3) {
        parts.push(format!("https://t.co/{:08x}", rng.random::<u32>()));
    }
    parts.join(" ")
}

/// Deterministically generates records for `config`.
pub fn generate_records(config: &SynthConfig) -> Result<Vec<RetweetRecord>> {
    if config.users == 0 {
        return Err(Error::InvalidInput("synthetic corpus needs at least one user".into()));
    }
    if !(config.zipf_exponent >= 0.0 && config.zipf_exponent.is_finite()) {
        return Err(Error::InvalidInput(format!("zipf exponent {} must be >= 0", config.zipf_exponent)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let reach_dist = LogNormal::new(0.0, 1.2).expect("valid parameters");
    let engagement_dist = LogNormal::new(1.0, 1.3).expect("valid parameters");
    let follower_dist: LogNormal<f64> = LogNormal::new(5.0, 2.0).expect("valid parameters");

    let span_days = 150i64;
    let epoch = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();

    let n_retweeters = if config.retweeters == 0 { config.users * 2 } else { config.retweeters };
    let retweeter_followers: Vec<u64> = (0..n_retweeters)
        .map(|_| follower_dist.sample(&mut rng).min(5e7) as u64)
        .collect();

    let mut ranks: Vec<usize> = (1..=config.users).collect();
    ranks.shuffle(&mut rng);
    let authors: Vec<Author> = ranks
        .iter()
        .enumerate()
        .map(|(i, &rank)| {
            let tweets = (config.max_tweets as f64 / (rank as f64).powf(config.zipf_exponent)).floor().max(1.0) as u32;
            let bot = rng.random_bool(config.bot_fraction);
            let bot_score = if rng.random_bool(0.05) {
                None
            } else if bot {
                Some(rng.random_range(0.41..1.0))
            } else {
                Some(rng.random_range(0.0..0.4))
            };
            Author {
                id: format!("u{i:05}"),
                tweets,
                reach: reach_dist.sample(&mut rng),
                bot_score,
                bot,
                spreader: rng.random_bool(config.spreader_fraction),
                start_day: rng.random_range(0..span_days / 2),
            }
        })
        .collect();

    let mut records = Vec::new();
    for author in &authors {
        for _ in 0..author.tweets {
            let text = tweet_text(&mut rng, author);
            let conspiracy_prob: f64 = if author.spreader && rng.random_bool(0.5) {
                rng.random_range(0.9..=1.0)
            } else {
                rng.random_range(0.0..0.85)
            };
            let retweets = (engagement_dist.sample(&mut rng) * author.reach).min(1e6) as u64;
            let replies = (retweets as f64 * rng.random_range(0.0..0.3)) as u64;
            let likes = (retweets as f64 * rng.random_range(1.0..4.0)) as u64;
            let quotes = (retweets as f64 * rng.random_range(0.0..0.1)) as u64;
            let observed = 1 + (retweets as f64).sqrt().min(24.0) as u64;
            let day = rng.random_range(author.start_day..span_days);
            let posted = epoch + Duration::days(day) + Duration::seconds(rng.random_range(0..86_400));
            let has_media = rng.random_bool(if author.bot { 0.35 } else { 0.2 });
            let sentiment = (rng.random_range(-1.0f64..1.0) * 1e4).round() / 1e4;
            let toxicity = (rng.random::<f64>().powi(3) * 1e4).round() / 1e4;
            let emotion = Emotion::ALL[rng.random_range(0..Emotion::ALL.len())];
            let conspiracy_prob = (conspiracy_prob * 1e4).round() / 1e4;

            for _ in 0..observed {
                let r = rng.random_range(0..n_retweeters);
                let delay = Duration::seconds(rng.random_range(0..7 * 86_400));
                records.push(RetweetRecord {
                    record_id: format!("t{:07}", records.len()),
                    retweeter_id: format!("r{r:05}"),
                    original_user_id: author.id.clone(),
                    timestamp: posted + delay,
                    text: text.clone(),
                    retweet_count: retweets,
                    reply_count: replies,
                    like_count: likes,
                    quote_count: quotes,
                    retweeter_followers: retweeter_followers[r],
                    has_media,
                    conspiracy_prob: Some(conspiracy_prob),
                    bot_score: author.bot_score.map(|b| (b * 1e4).round() / 1e4),
                    sentiment_compound: Some(sentiment),
                    toxicity: Some(toxicity),
                    emotion_label: Some(emotion),
                });
            }
        }
    }
    if let Some(cap) = config.max_records {
        records.truncate(cap);
    }
    Ok(records)
}

pub fn generate(config: &SynthConfig) -> Result<Corpus> {
    Corpus::from_records(generate_records(config)?, DEFAULT_CONSPIRACY_THRESHOLD)
}
