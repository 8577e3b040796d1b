//! Small record builders shared by unit tests.

use chrono::{TimeZone, Utc};

use crate::corpus::{Corpus, RetweetRecord};

pub fn rec(id: &str, retweeter: &str, author: &str, text: &str, counts: [u64; 4], followers: u64) -> RetweetRecord {
    RetweetRecord {
        record_id: id.to_string(),
        retweeter_id: retweeter.to_string(),
        original_user_id: author.to_string(),
        timestamp: Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap(),
        text: text.to_string(),
        retweet_count: counts[0],
        reply_count: counts[1],
        like_count: counts[2],
        quote_count: counts[3],
        retweeter_followers: followers,
        has_media: false,
        conspiracy_prob: None,
        bot_score: None,
        sentiment_compound: None,
        toxicity: None,
        emotion_label: None,
    }
}

pub fn corpus_of(records: Vec<RetweetRecord>) -> Corpus {
    Corpus::from_records(records, 0.9).unwrap()
}

/// Each user authors `n` distinct tweets, one record each.
pub fn contribution_corpus(users: &[(&str, usize)]) -> Corpus {
    let mut records = Vec::new();
    for (user, n) in users {
        for i in 0..*n {
            records.push(rec(&format!("{user}-{i}"), "rt", user, &format!("tweet {i}"), [1, 0, 0, 0], 0));
        }
    }
    corpus_of(records)
}
