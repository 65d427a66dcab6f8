//! Text cleaning for topic modeling: URL and stopword removal only.
//!
//! Hashtags and emojis are kept; stripping them loses too much of a short
//! post's meaning. The URL definition is shared with lexical extraction.

use std::collections::BTreeSet;
use std::path::Path;

/// A fixed, versioned stopword list. Bundled lists cover English and Dutch;
/// custom lists can be loaded from a one-word-per-line file.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

const STOPWORDS_EN: &str = include_str!("../../resources/stopwords_en.txt");
const STOPWORDS_NL: &str = include_str!("../../resources/stopwords_nl.txt");

impl StopwordList {
    /// Bundled English list.
    pub fn english() -> Self {
        Self::from_str_list(STOPWORDS_EN)
    }

    /// Bundled Dutch list.
    pub fn dutch() -> Self {
        Self::from_str_list(STOPWORDS_NL)
    }

    /// Bundled English + Dutch union, the pipeline default.
    pub fn default_bundle() -> Self {
        let mut list = Self::english();
        list.words.extend(Self::dutch().words);
        list
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        StopwordList {
            words: words
                .into_iter()
                .map(|w| w.into().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    fn from_str_list(raw: &str) -> Self {
        Self::from_words(raw.lines().map(|l| l.trim().to_string()))
    }

    /// Load a custom list, one word per line; blank lines and `#` comments
    /// are skipped.
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Ok(Self::from_words(
            raw.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Remove URLs and stopwords, collapse whitespace. Idempotent.
///
/// A whitespace token is dropped when its lowercase form, trimmed of ASCII
/// punctuation other than `#`, is in the stopword list. The trimming keeps
/// `the,` or `(is` from slipping past the list.
pub fn clean_text_for_topics(text: &str, stopwords: &StopwordList) -> String {
    let without_urls = strip_urls(text);
    let kept: Vec<&str> = without_urls
        .split_whitespace()
        .filter(|token| {
            let trimmed = token.trim_matches(|c: char| c.is_ascii_punctuation() && c != '#');
            let candidate = if trimmed.is_empty() { *token } else { trimmed };
            !stopwords.contains(candidate)
        })
        .collect();
    kept.join(" ")
}

/// Remove URL tokens using the same grammar as lexical extraction.
fn strip_urls(text: &str) -> String {
    let spans = super::lexical::url_byte_spans(text);
    if spans.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end) in spans {
        out.push_str(&text[cursor..start]);
        cursor = end;
    }
    out.push_str(&text[cursor..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stays_empty() {
        let sw = StopwordList::english();
        assert_eq!(clean_text_for_topics("", &sw), "");
    }

    #[test]
    fn spec_example_vote() {
        let sw = StopwordList::english();
        assert_eq!(
            clean_text_for_topics("the vote at https://a.b is on", &sw),
            "vote"
        );
    }

    #[test]
    fn hashtags_and_emojis_preserved() {
        let sw = StopwordList::english();
        assert_eq!(
            clean_text_for_topics("#midterms 🔥 rally", &sw),
            "#midterms 🔥 rally"
        );
    }

    #[test]
    fn stopword_with_trailing_punctuation_removed() {
        let sw = StopwordList::english();
        assert_eq!(clean_text_for_topics("The, vote (is) ON!", &sw), "vote");
    }

    #[test]
    fn dutch_stopwords_in_default_bundle() {
        let sw = StopwordList::default_bundle();
        assert_eq!(
            clean_text_for_topics("de makeup en het fitness", &sw),
            "makeup fitness"
        );
    }

    #[test]
    fn idempotent() {
        let sw = StopwordList::default_bundle();
        let inputs = [
            "the vote at https://a.b is on",
            "#midterms 🔥 rally",
            "  spaced   out  the  ",
            "www.ex.co only",
            "",
        ];
        for input in inputs {
            let once = clean_text_for_topics(input, &sw);
            let twice = clean_text_for_topics(&once, &sw);
            assert_eq!(once, twice, "not idempotent for {input:?}");
        }
    }

    #[test]
    fn custom_override_list() {
        let sw = StopwordList::from_words(["rally"]);
        assert_eq!(clean_text_for_topics("the rally", &sw), "the");
    }
}
