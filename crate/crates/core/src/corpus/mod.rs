//! Corpus data model, JSONL ingestion and platform-trait summaries.
//!
//! A corpus is an ordered list of posts, each tagged with the platform it
//! was published on and whether it is real or synthetic. The on-disk format
//! is JSONL, one post per line, UTF-8, with fields
//! `{id, platform, text, origin?, provider?}`; unknown fields are ignored.

mod clean;
mod lexical;

pub use clean::{clean_text_for_topics, StopwordList};
pub use lexical::{extract_from_text, extract_lexical_features, LexicalProfile};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

/// Errors from corpus construction and I/O.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("missing field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },
    #[error("field {field} at line {line} must be a string")]
    BadFieldType { field: &'static str, line: usize },
    #[error("duplicate id {id} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("invalid platform {name:?} at line {line}: must match [a-z0-9_]+")]
    InvalidPlatform { name: String, line: usize },
    #[error("synthetic post {id} has empty text")]
    EmptySyntheticText { id: String },
    #[error("corpus is empty")]
    Empty,
}

/// Lowercase platform identifier, e.g. `twitter` or `reddit`.
///
/// Uppercase ASCII input is folded on construction; anything outside
/// `[a-z0-9_]+` after folding is rejected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PlatformId(String);

impl PlatformId {
    /// Reserved tag for synthetic posts produced by multi-platform prompting,
    /// which by construction belong to no single platform.
    pub const MULTI: &'static str = "multi";

    pub fn new(name: &str) -> Result<Self, String> {
        let folded = name.to_ascii_lowercase();
        if folded.is_empty() || !folded.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
            return Err(format!("invalid platform {name:?}: must match [a-z0-9_]+"));
        }
        Ok(PlatformId(folded))
    }

    pub fn multi() -> Self {
        PlatformId(Self::MULTI.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_multi(&self) -> bool {
        self.0 == Self::MULTI
    }
}

impl fmt::Display for PlatformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PlatformId {
    type Error = String;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        PlatformId::new(&value)
    }
}

impl From<PlatformId> for String {
    fn from(p: PlatformId) -> String {
        p.0
    }
}

/// Whether a post came from a real platform or was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Real,
    Synthetic,
}

/// One social-media message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub platform: PlatformId,
    pub text: String,
    #[serde(default = "default_origin")]
    pub origin: Origin,
    /// Generator label for synthetic posts (model or provider name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
}

fn default_origin() -> Origin {
    Origin::Real
}

/// Ordered collection of posts spanning one or more platforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    posts: Vec<Post>,
    platforms: BTreeSet<PlatformId>,
}

impl Corpus {
    /// Build a corpus from posts, validating id uniqueness and the rule that
    /// synthetic posts carry non-empty text.
    pub fn new(posts: Vec<Post>) -> Result<Self, CorpusError> {
        let mut seen: HashSet<&str> = HashSet::with_capacity(posts.len());
        for (i, post) in posts.iter().enumerate() {
            if !seen.insert(&post.id) {
                return Err(CorpusError::DuplicateId {
                    id: post.id.clone(),
                    line: i + 1,
                });
            }
            if post.origin == Origin::Synthetic && post.text.is_empty() {
                return Err(CorpusError::EmptySyntheticText { id: post.id.clone() });
            }
        }
        let platforms = posts.iter().map(|p| p.platform.clone()).collect();
        Ok(Corpus { posts, platforms })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn platforms(&self) -> &BTreeSet<PlatformId> {
        &self.platforms
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn posts_for<'a>(&'a self, platform: &'a PlatformId) -> impl Iterator<Item = &'a Post> + 'a {
        self.posts.iter().filter(move |p| &p.platform == platform)
    }
}

/// Read a corpus from a JSONL file, preserving line order.
///
/// Each line must be a JSON object with at least `id`, `platform` and
/// `text`; `origin` defaults to `real`, unknown fields are ignored.
pub fn ingest_jsonl(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut posts = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        let post = post_from_value(&value, line_no)?;
        if !seen.insert(post.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: post.id,
                line: line_no,
            });
        }
        posts.push(post);
    }
    Corpus::new(posts)
}

fn string_field(
    value: &serde_json::Value,
    field: &'static str,
    line: usize,
) -> Result<String, CorpusError> {
    match value.get(field) {
        None => Err(CorpusError::MissingField { field, line }),
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(CorpusError::BadFieldType { field, line }),
    }
}

fn post_from_value(value: &serde_json::Value, line: usize) -> Result<Post, CorpusError> {
    let id = string_field(value, "id", line)?;
    let platform_raw = string_field(value, "platform", line)?;
    let text = string_field(value, "text", line)?;
    let platform = PlatformId::new(&platform_raw).map_err(|_| CorpusError::InvalidPlatform {
        name: platform_raw,
        line,
    })?;
    let origin = match value.get("origin").and_then(|v| v.as_str()) {
        Some("synthetic") => Origin::Synthetic,
        _ => Origin::Real,
    };
    let provider = value
        .get("provider")
        .and_then(|v| v.as_str())
        .map(str::to_string);
    Ok(Post {
        id,
        platform,
        text,
        origin,
        provider,
    })
}

/// Write a corpus as JSONL, one post per line, in post order.
pub fn write_jsonl(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let mut file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for post in corpus.posts() {
        let line = serde_json::to_string(post).expect("post serializes");
        writeln!(file, "{line}").map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

/// Per-platform averages of the four lexical trait counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TraitAverages {
    pub hashtags: f64,
    pub mentions: f64,
    pub urls: f64,
    pub emojis: f64,
}

/// Mean hashtag/mention/URL/emoji counts per post, per platform.
///
/// Averages run over all posts of a platform, including those with zero
/// counts.
pub fn platform_trait_summary(
    corpus: &Corpus,
) -> Result<BTreeMap<PlatformId, TraitAverages>, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let profiles = par::map_slice(corpus.posts(), |p| extract_from_text(&p.text));
    let mut sums: BTreeMap<PlatformId, (TraitAverages, u64)> = BTreeMap::new();
    for (post, profile) in corpus.posts().iter().zip(profiles.iter()) {
        let entry = sums
            .entry(post.platform.clone())
            .or_insert((TraitAverages::default(), 0));
        entry.0.hashtags += profile.hashtags as f64;
        entry.0.mentions += profile.mentions as f64;
        entry.0.urls += profile.urls as f64;
        entry.0.emojis += profile.emojis as f64;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(platform, (sum, n))| {
            let n = n as f64;
            (
                platform,
                TraitAverages {
                    hashtags: sum.hashtags / n,
                    mentions: sum.mentions / n,
                    urls: sum.urls / n,
                    emojis: sum.emojis / n,
                },
            )
        })
        .collect())
}

/// Pooled averages over every post in the corpus, ignoring platform tags.
pub fn pooled_trait_summary(corpus: &Corpus) -> Result<TraitAverages, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty);
    }
    let profiles = par::map_slice(corpus.posts(), |p| extract_from_text(&p.text));
    let mut sum = TraitAverages::default();
    for profile in &profiles {
        sum.hashtags += profile.hashtags as f64;
        sum.mentions += profile.mentions as f64;
        sum.urls += profile.urls as f64;
        sum.emojis += profile.emojis as f64;
    }
    let n = corpus.len() as f64;
    Ok(TraitAverages {
        hashtags: sum.hashtags / n,
        mentions: sum.mentions / n,
        urls: sum.urls / n,
        emojis: sum.emojis / n,
    })
}
