//! Hashtag frequency tables, co-hashtag networks and hashtag-based
//! political orientation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::RetweetRecord;
use crate::error::{Error, Result};
use crate::features::rank_counts;

static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#([\p{L}\p{N}_]+)").unwrap());

/// Lower-cased hashtags of `text` without the `#`, in order of appearance.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    HASHTAG
        .captures_iter(text)
        .map(|c| c[1].to_lowercase())
        .collect()
}

fn distinct_hashtags(text: &str) -> BTreeSet<String> {
    extract_hashtags(text).into_iter().collect()
}

fn normalize_tag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

/// The `n` most used hashtags, descending by count with ties broken
/// lexicographically.
pub fn top_hashtags<'a, I>(records: I, n: usize) -> Vec<(String, u64)>
where
    I: IntoIterator<Item = &'a RetweetRecord>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for r in records {
        for tag in extract_hashtags(&r.text) {
            *counts.entry(tag).or_insert(0) += 1;
        }
    }
    let mut ranked = rank_counts(counts);
    ranked.truncate(n);
    ranked
}

/// A set of hashtags, compared case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashtagSet(HashSet<String>);

const DEFAULT_CONSPIRACY_HASHTAGS: &str = include_str!("../data/conspiracy_hashtags.txt");

impl HashtagSet {
    pub fn parse(list: &str) -> Self {
        HashtagSet(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("# ") && *l != "#")
                .map(normalize_tag)
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_tags<I: IntoIterator<Item = S>, S: AsRef<str>>(tags: I) -> Self {
        HashtagSet(tags.into_iter().map(|t| normalize_tag(t.as_ref())).collect())
    }

    /// The bundled conspiracy-marker hashtags.
    pub fn default_conspiracy() -> Self {
        Self::parse(DEFAULT_CONSPIRACY_HASHTAGS)
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.0.contains(&normalize_tag(tag))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HashtagFlag {
    Conspiracy,
    Other,
}

impl HashtagFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            HashtagFlag::Conspiracy => "conspiracy",
            HashtagFlag::Other => "other",
        }
    }
}

/// Weighted undirected hashtag co-occurrence graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoHashtagGraph {
    /// Number of tweets using each hashtag.
    pub nodes: BTreeMap<String, u64>,
    /// Keys are ordered so that `a < b`.
    pub edges: BTreeMap<(String, String), u64>,
    pub node_flags: BTreeMap<String, HashtagFlag>,
}

impl CoHashtagGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one tweet; repeated tags within it count once.
    pub fn add_text(&mut self, text: &str, conspiracy: &HashtagSet) {
        let tags: Vec<String> = distinct_hashtags(text).into_iter().collect();
        for (i, a) in tags.iter().enumerate() {
            *self.nodes.entry(a.clone()).or_insert(0) += 1;
            self.node_flags.entry(a.clone()).or_insert(if conspiracy.contains(a) {
                HashtagFlag::Conspiracy
            } else {
                HashtagFlag::Other
            });
            for b in &tags[i + 1..] {
                *self.edges.entry((a.clone(), b.clone())).or_insert(0) += 1;
            }
        }
    }

    /// Combines two partial graphs; order of merging does not matter.
    pub fn merge(mut self, other: CoHashtagGraph) -> CoHashtagGraph {
        for (tag, n) in other.nodes {
            *self.nodes.entry(tag).or_insert(0) += n;
        }
        for (pair, n) in other.edges {
            *self.edges.entry(pair).or_insert(0) += n;
        }
        for (tag, flag) in other.node_flags {
            let slot = self.node_flags.entry(tag).or_insert(flag);
            *slot = (*slot).min(flag);
        }
        self
    }

    pub fn edge(&self, a: &str, b: &str) -> u64 {
        let key = if a <= b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    fn kept_edges(&self, floor: u64) -> impl Iterator<Item = (&(String, String), &u64)> {
        self.edges.iter().filter(move |(_, n)| **n >= floor)
    }

    /// GraphML with `weight` and `flag` node attributes and `weight` edge
    /// attributes. Edges below `floor` are dropped.
    pub fn write_graphml<W: Write>(&self, mut w: W, floor: u64) -> std::io::Result<()> {
        writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
        writeln!(w, r#"  <key id="nw" for="node" attr.name="weight" attr.type="long"/>"#)?;
        writeln!(w, r#"  <key id="nf" for="node" attr.name="flag" attr.type="string"/>"#)?;
        writeln!(w, r#"  <key id="ew" for="edge" attr.name="weight" attr.type="long"/>"#)?;
        writeln!(w, r#"  <graph id="cohashtag" edgedefault="undirected">"#)?;
        for (tag, n) in &self.nodes {
            let flag = self.node_flags.get(tag).copied().unwrap_or(HashtagFlag::Other);
            writeln!(
                w,
                r#"    <node id="{}"><data key="nw">{n}</data><data key="nf">{}</data></node>"#,
                xml_escape(tag),
                flag.as_str()
            )?;
        }
        for ((a, b), n) in self.kept_edges(floor) {
            writeln!(
                w,
                r#"    <edge source="{}" target="{}"><data key="ew">{n}</data></edge>"#,
                xml_escape(a),
                xml_escape(b)
            )?;
        }
        writeln!(w, "  </graph>")?;
        writeln!(w, "</graphml>")
    }

    /// One `a<TAB>b<TAB>count` line per edge at or above `floor`.
    pub fn write_edge_list<W: Write>(&self, mut w: W, floor: u64) -> std::io::Result<()> {
        for ((a, b), n) in self.kept_edges(floor) {
            writeln!(w, "{a}\t{b}\t{n}")?;
        }
        Ok(())
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn build_cohashtag_graph<'a, I>(records: I, conspiracy: &HashtagSet) -> CoHashtagGraph
where
    I: IntoIterator<Item = &'a RetweetRecord>,
{
    let mut g = CoHashtagGraph::new();
    for r in records {
        g.add_text(&r.text, conspiracy);
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Left,
    Right,
    NonPolitical,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::Left, Orientation::Right, Orientation::NonPolitical];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Left => "left",
            Orientation::Right => "right",
            Orientation::NonPolitical => "non_political",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "left" => Ok(Orientation::Left),
            "right" => Ok(Orientation::Right),
            "nonpolitical" | "neutral" | "none" => Ok(Orientation::NonPolitical),
            other => Err(Error::InvalidInput(format!("unknown orientation {other:?}"))),
        }
    }
}

/// Hashtag → orientation labels; lookups ignore case and a leading `#`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrientationLexicon(HashMap<String, Orientation>);

const DEFAULT_LEXICON: &str = include_str!("../data/orientation_lexicon.csv");

impl OrientationLexicon {
    /// Reads `hashtag,orientation` rows with a header line.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut map = HashMap::new();
        for row in rdr.records() {
            let row = row?;
            let (Some(tag), Some(label)) = (row.get(0), row.get(1)) else {
                return Err(Error::InvalidInput("lexicon rows need hashtag and orientation".into()));
            };
            map.insert(normalize_tag(tag), label.parse()?);
        }
        Ok(OrientationLexicon(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(file)
    }

    pub fn from_pairs<I: IntoIterator<Item = (S, Orientation)>, S: AsRef<str>>(pairs: I) -> Self {
        OrientationLexicon(pairs.into_iter().map(|(t, o)| (normalize_tag(t.as_ref()), o)).collect())
    }

    pub fn get(&self, tag: &str) -> Option<Orientation> {
        self.0.get(&normalize_tag(tag)).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl OrientationLexicon {
    /// The bundled lexicon covering the most common campaign hashtags.
    pub fn bundled() -> Self {
        static BUNDLED: LazyLock<OrientationLexicon> =
            LazyLock::new(|| OrientationLexicon::from_csv(DEFAULT_LEXICON.as_bytes()).expect("bundled lexicon parses"));
        BUNDLED.clone()
    }
}

/// Plurality label; a tie for first place, or a winning `NonPolitical`,
/// yields `NonPolitical`.
fn plurality(counts: [usize; 3]) -> Orientation {
    let best = *counts.iter().max().unwrap();
    if best == 0 || counts.iter().filter(|&&c| c == best).count() > 1 {
        return Orientation::NonPolitical;
    }
    Orientation::ALL[counts.iter().position(|&c| c == best).unwrap()]
}

/// Orientation of one text from its distinct lexicon-matched hashtags.
pub fn classify_text_orientation(text: &str, lexicon: &OrientationLexicon) -> Orientation {
    let mut counts = [0usize; 3];
    for tag in distinct_hashtags(text) {
        if let Some(o) = lexicon.get(&tag) {
            counts[o as usize] += 1;
        }
    }
    plurality(counts)
}

pub fn classify_orientation(record: &RetweetRecord, lexicon: &OrientationLexicon) -> Orientation {
    classify_text_orientation(&record.text, lexicon)
}

/// Majority over a user's political tweets only.
pub fn account_orientation_from_labels<I: IntoIterator<Item = Orientation>>(labels: I) -> Orientation {
    let mut counts = [0usize; 3];
    for l in labels {
        if l != Orientation::NonPolitical {
            counts[l as usize] += 1;
        }
    }
    plurality(counts)
}

pub fn classify_account_orientation<'a, I>(user_records: I, lexicon: &OrientationLexicon) -> Orientation
where
    I: IntoIterator<Item = &'a RetweetRecord>,
{
    account_orientation_from_labels(user_records.into_iter().map(|r| classify_orientation(r, lexicon)))
}
