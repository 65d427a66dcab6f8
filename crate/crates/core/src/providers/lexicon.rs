//! Lexicon-count sentiment baseline.

use std::collections::BTreeSet;

use super::{ProviderError, SentimentProvider, SentimentScores};

const POSITIVE_EN: &str = include_str!("../../resources/sentiment_positive_en.txt");
const NEGATIVE_EN: &str = include_str!("../../resources/sentiment_negative_en.txt");

/// Counts positive and negative lexicon hits per post; scores are add-one
/// smoothed counts normalized to sum to 1, with neutral carrying only the
/// smoothing mass. No hits therefore gives the uniform distribution and the
/// argmax tie rule lands on neutral.
pub struct LexiconSentiment {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl LexiconSentiment {
    /// Bundled English lexicons.
    pub fn english() -> Self {
        LexiconSentiment {
            positive: load(POSITIVE_EN),
            negative: load(NEGATIVE_EN),
        }
    }

    pub fn from_words<I, J, S>(positive: I, negative: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LexiconSentiment {
            positive: positive.into_iter().map(|w| w.into().to_lowercase()).collect(),
            negative: negative.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }
}

fn load(raw: &str) -> BTreeSet<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl SentimentProvider for LexiconSentiment {
    fn label(&self) -> &str {
        "lexicon-sentiment"
    }

    fn classify_sentiment(&self, text: &str) -> Result<SentimentScores, ProviderError> {
        let lower = text.to_lowercase();
        let mut pos = 0u64;
        let mut neg = 0u64;
        for word in lower.split(|c: char| !(c.is_alphanumeric() || c == '\'')) {
            if word.is_empty() {
                continue;
            }
            if self.positive.contains(word) {
                pos += 1;
            }
            if self.negative.contains(word) {
                neg += 1;
            }
        }
        Ok(SentimentScores::normalized(
            pos as f64 + 1.0,
            1.0,
            neg as f64 + 1.0,
        ))
    }
}
