//! Extraction of platform-trait tokens: hashtags, mentions, URLs, emojis.
//!
//! Token grammar:
//! * hashtag — `#` followed by one or more Unicode letters/digits/underscores
//! * mention — `@` followed by one or more letters/digits/underscores/periods,
//!   trailing periods stripped
//! * URL — `http://` or `https://` anywhere, or `www.` at a word boundary,
//!   consuming non-whitespace; trailing `.,;:!?)` stripped
//! * emoji — one extended grapheme cluster whose first scalar has the Emoji
//!   property and either default emoji presentation or an explicit VS16
//!   (U+FE0F) in the cluster; ZWJ sequences and regional-indicator flag
//!   pairs count as single emojis, bare digits/`#`/`*` do not
//!
//! The grammar is deliberately boundary-free for `#`/`@` and shadows tokens
//! inside URL spans, so a `#fragment` inside a URL is not a hashtag.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_properties::emoji::UnicodeEmoji;
use unicode_properties::EmojiStatus;
use unicode_segmentation::UnicodeSegmentation;

use super::Post;

/// Per-post lexical trait counts and the distinct token sets behind them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LexicalProfile {
    pub hashtags: u64,
    pub mentions: u64,
    pub urls: u64,
    pub emojis: u64,
    pub distinct_hashtags: BTreeSet<String>,
    pub distinct_mentions: BTreeSet<String>,
    pub distinct_urls: BTreeSet<String>,
    pub distinct_emojis: BTreeSet<String>,
}

/// Extract the lexical profile of a post's text. Pure and platform-independent.
pub fn extract_lexical_features(post: &Post) -> LexicalProfile {
    extract_from_text(&post.text)
}

/// Raw byte spans of URL matches, before trailing-punctuation stripping.
/// Shared with topic cleaning so both use one URL definition.
pub(crate) fn url_byte_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if let Some((_, raw_end_char)) = match_url(text, &chars, i) {
            let start = chars[i].0;
            let end = if raw_end_char < chars.len() {
                chars[raw_end_char].0
            } else {
                text.len()
            };
            spans.push((start, end));
            i = raw_end_char;
        } else {
            i += 1;
        }
    }
    spans
}

/// Extract the lexical profile of raw text.
///
/// URL spans are fixed first over the whole text; mention, hashtag and
/// emoji tokens are then matched only outside them, so a `#fragment` or
/// `@userinfo` inside a URL never double-counts.
pub fn extract_from_text(text: &str) -> LexicalProfile {
    let mut profile = LexicalProfile::default();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let url_spans = url_byte_spans(text);
    for (start, end) in &url_spans {
        let token = text[*start..*end].trim_end_matches(URL_TRAILING_PUNCT);
        profile.urls += 1;
        profile.distinct_urls.insert(token.to_string());
    }
    let in_url =
        |byte: usize| url_spans.iter().any(|&(start, end)| byte >= start && byte < end);

    let mut i = 0;
    while i < chars.len() {
        let (byte_pos, c) = chars[i];
        if in_url(byte_pos) {
            i += 1;
            continue;
        }
        if c == '@' {
            if let Some((token, next)) = match_mention(&chars, i, &in_url) {
                profile.mentions += 1;
                profile.distinct_mentions.insert(token);
                i = next;
                continue;
            }
        }
        if c == '#' {
            if let Some((token, next)) = match_hashtag(&chars, i, &in_url) {
                profile.hashtags += 1;
                profile.distinct_hashtags.insert(token);
                i = next;
                continue;
            }
        }
        i += 1;
    }

    for (offset, grapheme) in text.grapheme_indices(true) {
        if in_url(offset) {
            continue;
        }
        if is_emoji_grapheme(grapheme) {
            profile.emojis += 1;
            profile.distinct_emojis.insert(grapheme.to_string());
        }
    }

    profile
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c.is_numeric() || c == '_'
}

/// Hashtag body: letters, digits, underscore; stops at URL spans.
fn match_hashtag(
    chars: &[(usize, char)],
    start: usize,
    in_url: &dyn Fn(usize) -> bool,
) -> Option<(String, usize)> {
    let mut j = start + 1;
    let mut body = String::new();
    while j < chars.len() && is_word_char(chars[j].1) && !in_url(chars[j].0) {
        body.push(chars[j].1);
        j += 1;
    }
    if body.is_empty() {
        None
    } else {
        Some((format!("#{body}"), j))
    }
}

/// Mention body: letters, digits, underscore, period; trailing periods are
/// not part of the token. Stops at URL spans.
fn match_mention(
    chars: &[(usize, char)],
    start: usize,
    in_url: &dyn Fn(usize) -> bool,
) -> Option<(String, usize)> {
    let mut j = start + 1;
    let mut body = String::new();
    while j < chars.len()
        && (is_word_char(chars[j].1) || chars[j].1 == '.')
        && !in_url(chars[j].0)
    {
        body.push(chars[j].1);
        j += 1;
    }
    let trimmed = body.trim_end_matches('.');
    if trimmed.is_empty() {
        None
    } else {
        Some((format!("@{trimmed}"), j))
    }
}

const URL_TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')'];

fn starts_with_ignore_ascii_case(chars: &[(usize, char)], at: usize, prefix: &str) -> bool {
    let mut j = at;
    for pc in prefix.chars() {
        match chars.get(j) {
            Some(&(_, c)) if c.eq_ignore_ascii_case(&pc) => j += 1,
            _ => return false,
        }
    }
    true
}

/// Match a URL starting at char index `i`. Returns the stripped token and
/// the char index one past the raw (unstripped) match.
fn match_url(text: &str, chars: &[(usize, char)], i: usize) -> Option<(String, usize)> {
    let scheme = if starts_with_ignore_ascii_case(chars, i, "https://") {
        Some(8)
    } else if starts_with_ignore_ascii_case(chars, i, "http://") {
        Some(7)
    } else {
        None
    };
    let prefix_len = match scheme {
        Some(n) => n,
        None => {
            // `www.` only counts at a word boundary.
            if starts_with_ignore_ascii_case(chars, i, "www.") {
                let bounded = i == 0 || !is_word_char(chars[i - 1].1);
                if bounded {
                    4
                } else {
                    return None;
                }
            } else {
                return None;
            }
        }
    };

    let mut j = i;
    while j < chars.len() && !chars[j].1.is_whitespace() {
        j += 1;
    }
    let start_byte = chars[i].0;
    let end_byte = if j < chars.len() { chars[j].0 } else { text.len() };
    let raw = &text[start_byte..end_byte];
    let token = raw.trim_end_matches(URL_TRAILING_PUNCT);
    // Need at least one character beyond the prefix after stripping.
    if token.chars().count() <= prefix_len {
        return None;
    }
    Some((token.to_string(), j))
}

fn has_emoji_presentation(c: char) -> bool {
    matches!(
        c.emoji_status(),
        EmojiStatus::EmojiPresentation
            | EmojiStatus::EmojiPresentationAndModifierBase
            | EmojiStatus::EmojiPresentationAndEmojiComponent
            | EmojiStatus::EmojiPresentationAndModifierAndEmojiComponent
    )
}

const VS16: char = '\u{FE0F}';

fn is_emoji_grapheme(grapheme: &str) -> bool {
    let mut scalars = grapheme.chars();
    let first = match scalars.next() {
        Some(c) => c,
        None => return false,
    };
    if !first.is_emoji_char() {
        return false;
    }
    has_emoji_presentation(first) || grapheme.contains(VS16)
}
