//! Per-tweet linguistic measurements: Flesch–Kincaid grade, binary
//! content features, lengths, word frequencies and sentiment labels.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

use crate::corpus::{is_mention_token, is_url_token, RetweetRecord};
use crate::error::{Error, Result};

/// Grades above this are treated as nonsensical outliers.
pub const READABILITY_OUTLIER_GRADE: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadabilityScore {
    pub grade: f64,
    pub excluded: bool,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

/// Flesch–Kincaid grade level from raw counts.
pub fn fk_grade(words: usize, sentences: usize, syllables: usize) -> f64 {
    0.39 * (words as f64 / sentences as f64) + 11.8 * (syllables as f64 / words as f64) - 15.59
}

impl ReadabilityScore {
    pub fn from_counts(words: usize, sentences: usize, syllables: usize) -> Self {
        let grade = fk_grade(words, sentences, syllables);
        ReadabilityScore {
            grade,
            excluded: grade > READABILITY_OUTLIER_GRADE,
            words,
            sentences,
            syllables,
        }
    }
}

fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Vowel-group syllable estimate; at least one per word.
pub fn count_syllables(word: &str) -> usize {
    let letters: String = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev_vowel = false;
    for c in letters.chars() {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    if groups > 1 && letters.ends_with('e') && !letters.ends_with("le") {
        groups -= 1;
    }
    groups.max(1)
}

/// Sentence terminators are runs of `.`, `!` or `?` followed by whitespace
/// or the end of the text. Text without any counts as one sentence.
pub fn count_sentences(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let is_term = |c: char| matches!(c, '.' | '!' | '?');
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_term(chars[i]) {
            let mut j = i;
            while j < chars.len() && is_term(chars[j]) {
                j += 1;
            }
            if j == chars.len() || chars[j].is_whitespace() {
                count += 1;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    count.max(1)
}

/// Flesch–Kincaid grade of already-cleaned text. Hashtags count as words.
pub fn flesch_kincaid(cleaned_text: &str) -> Result<ReadabilityScore> {
    let words: Vec<&str> = cleaned_text.split_whitespace().filter(|t| is_word(t)).collect();
    if words.is_empty() {
        return Err(Error::UnreadableText);
    }
    let syllables = words.iter().map(|w| count_syllables(w)).sum();
    Ok(ReadabilityScore::from_counts(
        words.len(),
        count_sentences(cleaned_text),
        syllables,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureVector {
    pub has_mention: bool,
    pub has_hashtag: bool,
    pub has_media: bool,
    pub has_emoji: bool,
    pub has_exclamation: bool,
    pub has_question: bool,
    pub has_all_caps: bool,
    /// Characters once URLs, mentions and hashtags are removed.
    pub raw_length: usize,
    pub unedited_length: usize,
}

impl FeatureVector {
    pub const BINARY_NAMES: [&'static str; 7] = [
        "has_mention",
        "has_hashtag",
        "has_media",
        "has_emoji",
        "has_exclamation",
        "has_question",
        "has_all_caps",
    ];

    pub fn binary(&self) -> [bool; 7] {
        [
            self.has_mention,
            self.has_hashtag,
            self.has_media,
            self.has_emoji,
            self.has_exclamation,
            self.has_question,
            self.has_all_caps,
        ]
    }
}

static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:^|[^A-Za-z0-9_])@[A-Za-z0-9_]").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#[\p{L}\p{N}_]").unwrap());

/// Pictographs, emoticons, transport, supplemental symbols, dingbats and
/// regional-indicator flags.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F1E6..=0x1F1FF
        | 0x1F300..=0x1F5FF
        | 0x1F600..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F900..=0x1F9FF
        | 0x1FA70..=0x1FAFF
        | 0x2600..=0x26FF
        | 0x2700..=0x27BF)
}

fn is_all_caps_token(token: &str) -> bool {
    if token.starts_with('#') || token.starts_with('@') {
        return false;
    }
    let core = token.trim_matches(|c: char| !c.is_alphanumeric());
    core.chars().count() >= 2 && core.chars().all(|c| c.is_alphabetic() && c.is_uppercase())
}

/// Text with URLs, mentions and hashtags removed, whitespace collapsed.
pub fn raw_text(text: &str) -> String {
    text.split_whitespace()
        .filter(|t| !is_url_token(t) && !is_mention_token(t) && !t.starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn extract_features(record: &RetweetRecord) -> FeatureVector {
    let text = record.text.as_str();
    FeatureVector {
        has_mention: MENTION.is_match(text),
        has_hashtag: HASHTAG.is_match(text),
        has_media: record.has_media,
        has_emoji: text.chars().any(is_emoji),
        has_exclamation: text.contains('!'),
        has_question: text.contains('?'),
        has_all_caps: text.split_whitespace().any(is_all_caps_token),
        raw_length: raw_text(text).chars().count(),
        unedited_length: text.chars().count(),
    }
}

/// Case-insensitive stop-word set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

impl Stopwords {
    pub fn parse(list: &str) -> Self {
        Stopwords(
            list.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Stopwords(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    /// The common English filler-word list shipped with the word-cloud tooling.
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}_][\p{L}\p{N}_']*").unwrap());

/// Lower-cased word tokens of one text. Hashtags are skipped unless
/// `include_hashtags`, in which case the tag body counts as a word.
pub fn word_tokens(text: &str, include_hashtags: bool) -> Vec<String> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        let token = match token.strip_prefix('#') {
            Some(body) if include_hashtags => body,
            Some(_) => continue,
            None => token,
        };
        for m in WORD.find_iter(token) {
            let w = m.as_str().trim_end_matches('\'').to_lowercase();
            if w.chars().any(char::is_alphabetic) {
                out.push(w);
            }
        }
    }
    out
}

/// Word counts across `texts` minus stop words, sorted by count descending
/// then word ascending.
pub fn word_frequency<S: AsRef<str>>(texts: &[S], stopwords: &Stopwords, include_hashtags: bool) -> Vec<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in texts {
        for w in word_tokens(t.as_ref(), include_hashtags) {
            if !stopwords.contains(&w) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
    }
    rank_counts(counts)
}

pub(crate) fn rank_counts(counts: HashMap<String, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Neutral => "neutral",
            Sentiment::Negative => "negative",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labels a compound sentiment score with a ±0.001 neutral band.
pub fn sentiment_label(compound: f64) -> Sentiment {
    if compound > 0.001 {
        Sentiment::Positive
    } else if compound < -0.001 {
        Sentiment::Negative
    } else {
        Sentiment::Neutral
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::rec;
    use proptest::prelude::*;

    fn features(text: &str, media: bool) -> FeatureVector {
        let mut r = rec("1", "r", "a", text, [0; 4], 0);
        r.has_media = media;
        extract_features(&r)
    }

    #[test]
    fn readability_fixtures() {
        let s = flesch_kincaid("Go.").unwrap();
        assert_eq!((s.words, s.sentences, s.syllables), (1, 1, 1));
        assert!((s.grade - (-3.40)).abs() < 1e-6);
        assert!((fk_grade(10, 1, 15) - 6.01).abs() < 1e-6);
        let s = flesch_kincaid("The cat sat on a mat and ate happily yesterday").unwrap();
        assert_eq!((s.words, s.sentences, s.syllables), (10, 1, 14));
        let s = flesch_kincaid("The kitten sat on a mat and ate happily yesterday").unwrap();
        assert_eq!((s.words, s.sentences, s.syllables), (10, 1, 15));
        assert!((s.grade - 6.01).abs() < 1e-6);
    }

    #[test]
    fn outlier_flag() {
        assert!(ReadabilityScore::from_counts(1, 1, 4).grade > 25.0);
        assert!(ReadabilityScore::from_counts(1, 1, 4).excluded);
        // grade exactly 25 is kept; find counts giving 26.0 and 24.x
        let g = fk_grade(100, 1, 100);
        assert!(g > 25.0 && ReadabilityScore::from_counts(100, 1, 100).excluded);
        assert!(!ReadabilityScore::from_counts(10, 1, 15).excluded);
        assert!(matches!(flesch_kincaid("  ... !! "), Err(Error::UnreadableText)));
        assert!(matches!(flesch_kincaid(""), Err(Error::UnreadableText)));
    }

    #[test]
    fn syllable_heuristic() {
        assert_eq!(count_syllables("go"), 1);
        assert_eq!(count_syllables("make"), 1);
        assert_eq!(count_syllables("table"), 2);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("rhythm"), 1);
        assert_eq!(count_syllables("2020"), 1);
        assert_eq!(count_syllables("beautiful"), 3);
        assert_eq!(count_syllables("#plandemic"), 3);
    }

    #[test]
    fn sentence_boundaries() {
        assert_eq!(count_sentences("no terminator"), 1);
        assert_eq!(count_sentences("One. Two!! Three?"), 3);
        assert_eq!(count_sentences("3.14 is pi"), 1);
        assert_eq!(count_sentences("wait... what?!"), 2);
    }

    #[test]
    fn feature_examples() {
        let f = features("WAKE UP! @joe #truth", false);
        assert!(f.has_mention && f.has_hashtag && f.has_exclamation && f.has_all_caps);
        assert!(!f.has_emoji && !f.has_question && !f.has_media);

        let f = features("", true);
        assert_eq!(f.binary(), [false, false, true, false, false, false, false]);
        assert_eq!(f.raw_length, 0);

        let f = features("ok?", false);
        assert_eq!(f.binary(), [false, false, false, false, false, true, false]);
        assert_eq!(f.raw_length, 3);

        assert!(!features("I am here", false).has_all_caps);
        assert!(features("so \u{1F621} mad", false).has_emoji);
        assert!(!features("mail me at a@b.com", false).has_mention);
        assert_eq!(features("hi @bob see https://x.co #tag now", false).raw_length, "hi see now".len());
    }

    #[test]
    fn word_frequency_examples() {
        let sw = Stopwords::from_words(["the", "is"]);
        assert_eq!(
            word_frequency(&["the virus is the plan"], &sw, false),
            vec![("plan".to_string(), 1), ("virus".to_string(), 1)]
        );
        assert!(word_frequency::<&str>(&[], &sw, false).is_empty());
        assert_eq!(word_frequency(&["Trump trump TRUMP"], &sw, false), vec![("trump".to_string(), 3)]);
        assert_eq!(word_frequency(&["#maga now"], &sw, false), vec![("now".to_string(), 1)]);
        assert_eq!(word_frequency(&["#maga now"], &sw, true).len(), 2);
    }

    #[test]
    fn default_stopwords_has_192_entries() {
        let sw = Stopwords::default();
        assert_eq!(sw.len(), 192);
        for w in ["an", "and", "the", "they"] {
            assert!(sw.contains(w));
        }
    }

    #[test]
    fn sentiment_examples() {
        assert_eq!(sentiment_label(0.62), Sentiment::Positive);
        assert_eq!(sentiment_label(0.0), Sentiment::Neutral);
        assert_eq!(sentiment_label(0.001), Sentiment::Neutral);
        assert_eq!(sentiment_label(-0.001), Sentiment::Neutral);
        assert_eq!(sentiment_label(-0.002), Sentiment::Negative);
    }

    proptest! {
        #[test]
        fn grade_ignores_extra_whitespace(words in proptest::collection::vec("[A-Za-z]{1,9}[.!?]?", 1..15), pad in 1usize..4) {
            let tight = words.join(" ");
            let loose = words.join(&" ".repeat(pad + 1));
            prop_assert_eq!(flesch_kincaid(&tight).unwrap(), flesch_kincaid(&format!("  {loose}\t")).unwrap());
        }

        #[test]
        fn features_monotone_under_concatenation(s in "\\PC{0,30}", t in "\\PC{0,30}") {
            let a = features(&s, false);
            let b = features(&format!("{s} {t}"), false);
            for (x, y) in a.binary().iter().zip(b.binary()) {
                prop_assert!(!x || y);
            }
            prop_assert!(a.raw_length <= a.unedited_length);
        }

        #[test]
        fn frequency_counts_sum_to_tokens(texts in proptest::collection::vec("[a-zA-Z #']{0,40}", 0..6)) {
            let sw = Stopwords::default();
            let freq = word_frequency(&texts, &sw, false);
            let tokens = texts.iter().flat_map(|t| word_tokens(t, false)).filter(|w| !sw.contains(w)).count();
            prop_assert_eq!(freq.iter().map(|p| p.1).sum::<u64>() as usize, tokens);
        }

        #[test]
        fn sentiment_partitions_interval(x in -1.0f64..=1.0) {
            let hits = [x > 0.001, (-0.001..=0.001).contains(&x), x < -0.001];
            prop_assert_eq!(hits.iter().filter(|h| **h).count(), 1);
            let expected = Sentiment::ALL[hits.iter().position(|h| *h).unwrap()];
            prop_assert_eq!(sentiment_label(x), expected);
        }
    }
}
