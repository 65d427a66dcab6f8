//! Deterministic offline baselines for embedding and chat.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{ChatProvider, EmbeddingProvider, ProviderError};
use crate::par;
use crate::seeds::fnv1a64;

/// Bag-of-tokens feature-hashing embedder: each lowercased whitespace token
/// is FNV-hashed into one of 64 buckets with term-frequency weight. Cosine
/// similarity then reflects token overlap, which keeps expected values
/// computable by hand. Token order never matters.
pub struct MockEmbedder {
    dim: usize,
}

pub const MOCK_EMBED_DIM: usize = 64;

impl MockEmbedder {
    pub fn new() -> Self {
        MockEmbedder { dim: MOCK_EMBED_DIM }
    }
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new()
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn label(&self) -> &str {
        "mock-embed"
    }

    fn embed_raw(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let dim = self.dim;
        Ok(par::map_slice(texts, |text| {
            let mut v = vec![0.0; dim];
            for token in text.to_lowercase().split_whitespace() {
                let bucket = (fnv1a64(token.as_bytes()) % dim as u64) as usize;
                v[bucket] += 1.0;
            }
            v
        }))
    }

    fn dim_hint(&self) -> Option<usize> {
        Some(self.dim)
    }
}

/// Deterministic chat baseline: recombines bigrams of the example posts
/// embedded in the prompt into the exact number of requested items. Output
/// is a pure function of (seed, prompt), so call order and concurrency do
/// not affect results.
pub struct MockChat {
    seed: u64,
}

impl MockChat {
    pub fn new(seed: u64) -> Self {
        MockChat { seed }
    }
}

fn example_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^\s*Example \d+:\s?(.*)$").expect("static regex"))
}

fn requested_count_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"generate (\d+) new").expect("static regex"))
}

impl ChatProvider for MockChat {
    fn label(&self) -> &str {
        "mock-chat"
    }

    fn chat_complete(&self, prompt: &str) -> Result<String, ProviderError> {
        if prompt.is_empty() {
            return Err(ProviderError::EmptyPrompt);
        }
        log::debug!(
            "chat request {:016x} via mock-chat",
            fnv1a64(prompt.as_bytes())
        );

        let requested: usize = requested_count_re()
            .captures(prompt)
            .and_then(|c| c[1].parse().ok())
            .unwrap_or(1);

        let mut examples: Vec<String> = example_line_re()
            .captures_iter(prompt)
            .map(|c| c[1].trim().trim_end_matches(';').trim().to_string())
            .filter(|e| !e.is_empty())
            .collect();
        if examples.is_empty() {
            // Arbitrary prompt: fall back to the prompt's own words.
            examples.push(prompt.to_string());
        }

        let tokenized: Vec<Vec<&str>> = examples
            .iter()
            .map(|e| e.split_whitespace().collect())
            .collect();
        let mut successors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for tokens in &tokenized {
            for pair in tokens.windows(2) {
                successors.entry(pair[0]).or_default().push(pair[1]);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ fnv1a64(prompt.as_bytes()).rotate_left(17),
        );
        let mut items = Vec::with_capacity(requested);
        for _ in 0..requested {
            let mut item = generate_item(&tokenized, &successors, &mut rng);
            // Never echo an example verbatim.
            let mut tries = 0;
            while examples.iter().any(|e| e == &item) && tries < 8 {
                item = generate_item(&tokenized, &successors, &mut rng);
                tries += 1;
            }
            if examples.iter().any(|e| e == &item) {
                item.push('!');
            }
            items.push(item);
        }

        Ok(items
            .iter()
            .enumerate()
            .map(|(i, item)| format!("{}. {}", i + 1, item))
            .collect::<Vec<_>>()
            .join("\n"))
    }
}

fn generate_item(
    tokenized: &[Vec<&str>],
    successors: &BTreeMap<&str, Vec<&str>>,
    rng: &mut ChaCha8Rng,
) -> String {
    let template = &tokenized[rng.random_range(0..tokenized.len())];
    let target_len = template.len().max(3);
    let mut out: Vec<&str> = Vec::with_capacity(target_len);
    let mut current = start_token(tokenized, rng);
    out.push(current);
    while out.len() < target_len {
        current = match successors.get(current) {
            Some(nexts) if !nexts.is_empty() => nexts[rng.random_range(0..nexts.len())],
            _ => start_token(tokenized, rng),
        };
        out.push(current);
    }
    out.join(" ")
}

fn start_token<'a>(tokenized: &[Vec<&'a str>], rng: &mut ChaCha8Rng) -> &'a str {
    loop {
        let example = &tokenized[rng.random_range(0..tokenized.len())];
        if let Some(first) = example.first() {
            return first;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{cosine, Embedder};

    fn embed(text: &str) -> Vec<f64> {
        MockEmbedder::new()
            .embed_raw(&[text.to_string()])
            .unwrap()
            .remove(0)
    }

    #[test]
    fn bag_of_tokens_is_order_insensitive() {
        assert_eq!(embed("vote ballot"), embed("ballot vote"));
    }

    #[test]
    fn shared_token_gives_strictly_partial_similarity() {
        let sim = cosine(&embed("vote ballot"), &embed("vote tax"));
        assert!(sim > 0.0 && sim < 1.0, "sim = {sim}");
    }

    #[test]
    fn self_cosine_is_one() {
        for text in ["vote", "a longer text with more words", "🔥 #tags"] {
            let v = embed(text);
            assert!((cosine(&v, &v) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cosine_is_symmetric() {
        let a = embed("vote ballot midterm");
        let b = embed("tax vote");
        assert_eq!(cosine(&a, &b), cosine(&b, &a));
    }

    #[test]
    fn mock_chat_is_deterministic_for_seed_and_prompt() {
        let prompt = "Example 1: the vote is near;\nExample 2: ballots are out;\nPlease generate 5 new posts now";
        let a = MockChat::new(7).chat_complete(prompt).unwrap();
        let b = MockChat::new(7).chat_complete(prompt).unwrap();
        assert_eq!(a, b);
        let c = MockChat::new(8).chat_complete(prompt).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mock_chat_emits_requested_count() {
        let prompt = "Example 1: one two three;\nExample 2: four five six;\nPlease generate 5 new posts";
        let out = MockChat::new(1).chat_complete(prompt).unwrap();
        assert_eq!(out.lines().count(), 5);
    }

    #[test]
    fn mock_chat_rejects_empty_prompt() {
        assert!(matches!(
            MockChat::new(1).chat_complete(""),
            Err(ProviderError::EmptyPrompt)
        ));
    }

    #[test]
    fn mock_chat_never_echoes_examples() {
        let prompt =
            "Example 1: aa bb cc;\nExample 2: aa bb cc;\nExample 3: aa bb cc;\ngenerate 4 new posts";
        let out = MockChat::new(3).chat_complete(prompt).unwrap();
        for line in out.lines() {
            let body = line.split_once(". ").unwrap().1;
            assert_ne!(body, "aa bb cc");
        }
    }

    #[test]
    fn embedder_wrapper_roundtrip() {
        let embedder = Embedder::new(Box::new(MockEmbedder::new()));
        let out = embedder
            .embed_batch(&["vote".to_string(), "vote vote".to_string()])
            .unwrap();
        // Same direction after TF weighting, so unit vectors coincide.
        assert!((out[0].cosine(&out[1]) - 1.0).abs() < 1e-12);
    }
}
