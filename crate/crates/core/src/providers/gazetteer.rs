//! Case-insensitive gazetteer NER baseline with longest-match-first.

use super::{EntityMention, NerProvider, ProviderError};

/// A gazetteer entry, pre-lowered for matching.
#[derive(Debug, Clone)]
struct Entry {
    /// Lowercased, whitespace-collapsed surface form.
    lowered: Vec<char>,
    label: String,
}

/// Matches gazetteer entries left to right, longest match first,
/// case-insensitively and at word boundaries, producing non-overlapping
/// mentions whose surfaces slice back into the original text.
pub struct GazetteerNer {
    /// Sorted by match length descending, then lexicographically.
    entries: Vec<Entry>,
}

impl GazetteerNer {
    pub fn new<I, S>(surfaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::with_labels(surfaces.into_iter().map(|s| (s.as_ref().to_string(), "entity".to_string())))
    }

    pub fn with_labels<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut entries: Vec<Entry> = entries
            .into_iter()
            .filter_map(|(surface, label)| {
                let normalized = normalize(&surface);
                if normalized.is_empty() {
                    None
                } else {
                    Some(Entry {
                        lowered: normalized.chars().collect(),
                        label,
                    })
                }
            })
            .collect();
        entries.sort_by(|a, b| {
            b.lowered
                .len()
                .cmp(&a.lowered.len())
                .then_with(|| a.lowered.cmp(&b.lowered))
        });
        entries.dedup_by(|a, b| a.lowered == b.lowered);
        GazetteerNer { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lowercase and collapse internal whitespace to single spaces.
pub(crate) fn normalize(surface: &str) -> String {
    surface
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// One original character expanded for case folding.
#[derive(Debug, Clone, Copy)]
struct Folded {
    lower: char,
    byte_start: usize,
    byte_end: usize,
    orig: char,
}

impl NerProvider for GazetteerNer {
    fn label(&self) -> &str {
        "gazetteer-ner"
    }

    fn extract_entities(&self, text: &str) -> Result<Vec<EntityMention>, ProviderError> {
        if text.is_empty() || self.entries.is_empty() {
            return Ok(Vec::new());
        }
        // Expanded lowercase view keeping byte offsets into the original.
        let mut folded: Vec<Folded> = Vec::with_capacity(text.len());
        for (byte_start, orig) in text.char_indices() {
            let byte_end = byte_start + orig.len_utf8();
            for lower in orig.to_lowercase() {
                folded.push(Folded {
                    lower,
                    byte_start,
                    byte_end,
                    orig,
                });
            }
        }

        let mut mentions = Vec::new();
        let mut i = 0;
        while i < folded.len() {
            let at_boundary = i == 0 || !is_word_char(folded[i - 1].orig);
            if at_boundary && is_word_char(folded[i].orig) {
                if let Some((entry, end)) = self.longest_match(&folded, i) {
                    let span = (folded[i].byte_start, folded[end - 1].byte_end);
                    mentions.push(EntityMention {
                        surface: text[span.0..span.1].to_string(),
                        label: entry.label.clone(),
                        span,
                    });
                    i = end;
                    continue;
                }
            }
            i += 1;
        }
        Ok(mentions)
    }
}

impl GazetteerNer {
    /// Longest entry matching at folded index `i` with a word boundary after
    /// it; entries are pre-sorted longest first.
    fn longest_match<'a>(&'a self, folded: &[Folded], i: usize) -> Option<(&'a Entry, usize)> {
        'entry: for entry in &self.entries {
            let mut j = i;
            for &ec in &entry.lowered {
                // Entry whitespace matches any run of original whitespace.
                if ec == ' ' {
                    let mut saw_space = false;
                    while j < folded.len() && folded[j].orig.is_whitespace() {
                        saw_space = true;
                        j += 1;
                    }
                    if !saw_space {
                        continue 'entry;
                    }
                } else {
                    if j >= folded.len() || folded[j].lower != ec {
                        continue 'entry;
                    }
                    j += 1;
                }
            }
            let boundary_after = j >= folded.len() || !is_word_char(folded[j].orig);
            if boundary_after {
                return Some((entry, j));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_insensitive_two_mentions() {
        let ner = GazetteerNer::new(["joe biden", "arizona"]);
        let mentions = ner.extract_entities("Joe Biden won Arizona").unwrap();
        assert_eq!(mentions.len(), 2);
        assert_eq!(mentions[0].surface, "Joe Biden");
        assert_eq!(mentions[1].surface, "Arizona");
    }

    #[test]
    fn empty_text_no_mentions() {
        let ner = GazetteerNer::new(["x"]);
        assert!(ner.extract_entities("").unwrap().is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let ner = GazetteerNer::new(["new york", "york"]);
        let mentions = ner.extract_entities("new york").unwrap();
        assert_eq!(mentions.len(), 1);
        assert_eq!(mentions[0].surface, "new york");
    }

    #[test]
    fn no_partial_word_matches() {
        let ner = GazetteerNer::new(["york"]);
        assert!(ner.extract_entities("yorkshire pudding").unwrap().is_empty());
        assert_eq!(ner.extract_entities("in york today").unwrap().len(), 1);
    }

    #[test]
    fn spans_slice_back_and_never_overlap() {
        let ner = GazetteerNer::new(["joe biden", "biden", "pa"]);
        let text = "Joe Biden met biden in PA";
        let mentions = ner.extract_entities(text).unwrap();
        let mut last_end = 0;
        for m in &mentions {
            assert!(m.span.0 >= last_end, "overlap at {:?}", m.span);
            assert_eq!(&text[m.span.0..m.span.1], m.surface);
            last_end = m.span.1;
        }
        assert_eq!(mentions.len(), 3);
    }

    #[test]
    fn multiword_whitespace_collapses() {
        let ner = GazetteerNer::new(["joe  biden"]);
        let mentions = ner.extract_entities("joe   biden").unwrap();
        assert_eq!(mentions.len(), 1);
    }
}
