//! Independent reference implementations used only to check the toolkit's
//! results. Each is written as direct brute force against the documented
//! token grammar and formulas, separate from the library's code paths.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use synthcorpus::providers::EmbeddingVector;
use unicode_properties::emoji::UnicodeEmoji;
use unicode_properties::EmojiStatus;
use unicode_segmentation::UnicodeSegmentation;

/// Reference lexical scanner: URL spans first over an ASCII-folded view,
/// then mentions/hashtags/emojis outside those spans.
pub fn lexical_scan(text: &str) -> (u64, u64, u64, u64) {
    let spans = reference_url_spans(text);
    let in_span = |byte: usize| spans.iter().any(|&(s, e)| byte >= s && byte < e);

    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut hashtags = 0;
    let mut mentions = 0;
    let mut i = 0;
    while i < chars.len() {
        let (byte, c) = chars[i];
        if in_span(byte) {
            i += 1;
            continue;
        }
        if c == '#' || c == '@' {
            let allow_dot = c == '@';
            let mut j = i + 1;
            let mut body = String::new();
            while j < chars.len() && !in_span(chars[j].0) {
                let cj = chars[j].1;
                let word = cj.is_alphabetic() || cj.is_numeric() || cj == '_';
                if word || (allow_dot && cj == '.') {
                    body.push(cj);
                    j += 1;
                } else {
                    break;
                }
            }
            let effective = if allow_dot {
                body.trim_end_matches('.')
            } else {
                body.as_str()
            };
            if !effective.is_empty() {
                if c == '#' {
                    hashtags += 1;
                } else {
                    mentions += 1;
                }
                i = j;
                continue;
            }
        }
        i += 1;
    }

    let mut emojis = 0;
    for (offset, grapheme) in text.grapheme_indices(true) {
        if in_span(offset) {
            continue;
        }
        let first = match grapheme.chars().next() {
            Some(c) => c,
            None => continue,
        };
        let presentation = matches!(
            first.emoji_status(),
            EmojiStatus::EmojiPresentation
                | EmojiStatus::EmojiPresentationAndModifierBase
                | EmojiStatus::EmojiPresentationAndEmojiComponent
                | EmojiStatus::EmojiPresentationAndModifierAndEmojiComponent
        );
        if first.is_emoji_char() && (presentation || grapheme.contains('\u{FE0F}')) {
            emojis += 1;
        }
    }

    (hashtags, mentions, spans.len() as u64, emojis)
}

fn is_word(c: char) -> bool {
    c.is_alphabetic() || c.is_numeric() || c == '_'
}

fn reference_url_spans(text: &str) -> Vec<(usize, usize)> {
    // ASCII-only fold keeps every byte offset stable.
    let folded: String = text
        .chars()
        .map(|c| if c.is_ascii() { c.to_ascii_lowercase() } else { c })
        .collect();
    let mut spans = Vec::new();
    let mut pos = 0;
    while pos < folded.len() {
        let candidate = ["https://", "http://", "www."]
            .iter()
            .filter_map(|p| folded[pos..].find(p).map(|rel| (pos + rel, *p)))
            .min_by_key(|(start, _)| *start);
        let (start, prefix) = match candidate {
            Some(c) => c,
            None => break,
        };
        let bounded = prefix != "www."
            || text[..start].chars().next_back().is_none_or(|c| !is_word(c));
        let token_end = text[start..]
            .char_indices()
            .find(|(_, c)| c.is_whitespace())
            .map(|(i, _)| start + i)
            .unwrap_or(text.len());
        let token = text[start..token_end].trim_end_matches(['.', ',', ';', ':', '!', '?', ')']);
        let valid = bounded && token.chars().count() > prefix.chars().count();
        if valid {
            spans.push((start, token_end));
            pos = token_end;
        } else {
            pos = start + 1;
        }
    }
    spans
}

/// One pair of independent standard normals (Box-Muller).
pub fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Adjusted Rand index; every label value (including -1 noise) is its own
/// cluster.
pub fn adjusted_rand_index(truth: &[i32], predicted: &[i32]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    let n = truth.len() as f64;
    let mut contingency: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    let mut rows: BTreeMap<i32, f64> = BTreeMap::new();
    let mut cols: BTreeMap<i32, f64> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *contingency.entry((t, p)).or_default() += 1.0;
        *rows.entry(t).or_default() += 1.0;
        *cols.entry(p).or_default() += 1.0;
    }
    let comb2 = |x: f64| x * (x - 1.0) / 2.0;
    let sum_ij: f64 = contingency.values().map(|&v| comb2(v)).sum();
    let sum_a: f64 = rows.values().map(|&v| comb2(v)).sum();
    let sum_b: f64 = cols.values().map(|&v| comb2(v)).sum();
    let expected = sum_a * sum_b / comb2(n);
    let max_index = (sum_a + sum_b) / 2.0;
    if (max_index - expected).abs() < 1e-12 {
        return 1.0;
    }
    (sum_ij - expected) / (max_index - expected)
}

/// Tokenizer for the c-TFIDF oracle: lowercase, split on non-alphanumeric,
/// a single leading `#` is retained when directly followed by a word char.
fn tokenize_reference(text: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    let mut buffer: Option<String> = None;
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() {
            buffer.get_or_insert_with(String::new).push(c);
        } else if c == '#' && buffer.is_none() {
            buffer = Some(String::from("#"));
        } else if let Some(token) = buffer.take() {
            if token != "#" {
                tokens.push(token);
            }
        }
    }
    if let Some(token) = buffer.take() {
        if token != "#" {
            tokens.push(token);
        }
    }
    tokens
}

/// Brute-force c-TFIDF: tf(t,c)/Σ tf(t,c) × ln(1 + A/f(t)) over unigrams
/// and adjacent bigrams.
pub fn ctfidf_bruteforce(
    docs_by_class: &BTreeMap<i32, Vec<String>>,
) -> BTreeMap<i32, BTreeMap<String, f64>> {
    let mut tf: BTreeMap<i32, BTreeMap<String, f64>> = BTreeMap::new();
    for (&class, docs) in docs_by_class {
        let counts = tf.entry(class).or_default();
        for doc in docs {
            let tokens = tokenize_reference(doc);
            for t in &tokens {
                *counts.entry(t.clone()).or_default() += 1.0;
            }
            for pair in tokens.windows(2) {
                *counts.entry(format!("{} {}", pair[0], pair[1])).or_default() += 1.0;
            }
        }
    }

    let mut corpus_frequency: BTreeMap<String, f64> = BTreeMap::new();
    let mut total = 0.0;
    for counts in tf.values() {
        for (term, &count) in counts {
            *corpus_frequency.entry(term.clone()).or_default() += count;
            total += count;
        }
    }
    let average_per_class = total / tf.len() as f64;

    tf.iter()
        .map(|(&class, counts)| {
            let class_total: f64 = counts.values().sum();
            let weights = counts
                .iter()
                .map(|(term, &count)| {
                    let weight = count / class_total
                        * (1.0 + average_per_class / corpus_frequency[term]).ln();
                    (term.clone(), weight)
                })
                .collect();
            (class, weights)
        })
        .collect()
}

/// Brute-force sort-then-greedy matching by repeated global argmax.
#[allow(clippy::type_complexity)]
pub fn greedy_bruteforce(
    matrix: &[Vec<f64>],
    threshold: f64,
) -> (Vec<(usize, usize, f64)>, Vec<usize>, Vec<usize>) {
    let rows = matrix.len();
    let cols = matrix.first().map(|r| r.len()).unwrap_or(0);
    let mut row_free = vec![true; rows];
    let mut col_free = vec![true; cols];
    let mut matched = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..rows {
            if !row_free[i] {
                continue;
            }
            for j in 0..cols {
                if !col_free[j] {
                    continue;
                }
                let s = matrix[i][j];
                let better = match best {
                    None => true,
                    Some((bi, bj, bs)) => s > bs || (s == bs && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((i, j, s));
                }
            }
        }
        match best {
            Some((i, j, s)) if s >= threshold => {
                row_free[i] = false;
                col_free[j] = false;
                matched.push((i, j, s));
            }
            _ => break,
        }
    }
    (
        matched,
        (0..rows).filter(|&i| row_free[i]).collect(),
        (0..cols).filter(|&j| col_free[j]).collect(),
    )
}

fn cosine_reference(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Brute-force average similarity and high/fair recall counts.
pub fn recall_bruteforce(
    real: &[EmbeddingVector],
    synth: &[EmbeddingVector],
    high: f64,
    fair: (f64, f64),
) -> (f64, usize, usize) {
    let mut total = 0.0;
    let mut high_count = 0;
    let mut fair_count = 0;
    for s in synth {
        let mut best = f64::NEG_INFINITY;
        for r in real {
            let sim = cosine_reference(s.values(), r.values());
            total += sim;
            best = best.max(sim);
        }
        if best > high {
            high_count += 1;
        } else if best >= fair.0 && best <= fair.1 {
            fair_count += 1;
        }
    }
    (
        total / (real.len() * synth.len()) as f64,
        high_count,
        fair_count,
    )
}

/// Minimum within-cluster sum of squares over every 2-partition with both
/// sides non-empty.
pub fn best_two_partition_inertia(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    assert!((2..=20).contains(&n));
    let dim = points[0].len();
    let sse = |members: &[usize]| -> f64 {
        let mut mean = vec![0.0; dim];
        for &i in members {
            for (m, v) in mean.iter_mut().zip(&points[i]) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= members.len() as f64;
        }
        members
            .iter()
            .map(|&i| {
                points[i]
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| (v - m) * (v - m))
                    .sum::<f64>()
            })
            .sum()
    };
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let side_a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let side_b: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        let total = sse(&side_a) + sse(&side_b);
        if total < best {
            best = total;
        }
    }
    best
}
