//! Class-based TF-IDF keyword extraction.
//!
//! For term t in class c:
//!
//! ```text
//! weight(t, c) = tf(t, c) / Σ_t tf(t, c) × ln(1 + A / f(t))
//! ```
//!
//! where f(t) is the total frequency of t across all classes and A is the
//! average term count per class. Terms are lowercase unigrams (a `#` prefix
//! is kept) plus bigrams of adjacent tokens. Equal weights break
//! lexicographically.

use std::collections::BTreeMap;

/// Tokenize one document: lowercase, split on non-alphanumeric except a
/// retained `#` prefix.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in lower.chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if c == '#' && current.is_empty() {
            current.push('#');
        } else {
            flush_token(&mut current, &mut tokens);
        }
    }
    flush_token(&mut current, &mut tokens);
    tokens
}

fn flush_token(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() && current != "#" {
        tokens.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

/// Unigrams plus bigrams of adjacent tokens within one document.
fn terms_of(text: &str) -> Vec<String> {
    let tokens = tokenize(text);
    let mut terms = tokens.clone();
    for pair in tokens.windows(2) {
        terms.push(format!("{} {}", pair[0], pair[1]));
    }
    terms
}

/// Ranked `(term, weight)` lists per class, weight descending, top_k each.
///
/// A class whose documents clean down to nothing gets an empty list and a
/// warning.
pub fn ctfidf_keywords(
    docs_by_class: &BTreeMap<i32, Vec<String>>,
    top_k: usize,
) -> BTreeMap<i32, Vec<(String, f64)>> {
    // Term frequencies per class.
    let mut tf: BTreeMap<i32, BTreeMap<String, u64>> = BTreeMap::new();
    for (&class, docs) in docs_by_class {
        let counts = tf.entry(class).or_default();
        for doc in docs {
            for term in terms_of(doc) {
                *counts.entry(term).or_default() += 1;
            }
        }
    }

    let n_classes = tf.len().max(1);
    let mut corpus_freq: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total_terms: u64 = 0;
    for counts in tf.values() {
        for (term, &count) in counts {
            *corpus_freq.entry(term).or_default() += count;
            total_terms += count;
        }
    }
    let avg_per_class = total_terms as f64 / n_classes as f64;

    let mut result = BTreeMap::new();
    for (&class, counts) in &tf {
        if counts.is_empty() {
            log::warn!("class {class} has no terms after cleaning; empty keyword list");
            result.insert(class, Vec::new());
            continue;
        }
        let class_total: u64 = counts.values().sum();
        let mut weighted: Vec<(String, f64)> = counts
            .iter()
            .map(|(term, &count)| {
                let tf_norm = count as f64 / class_total as f64;
                let idf = (1.0 + avg_per_class / corpus_freq[term.as_str()] as f64).ln();
                (term.clone(), tf_norm * idf)
            })
            .collect();
        weighted.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite weight")
                .then_with(|| a.0.cmp(&b.0))
        });
        weighted.truncate(top_k);
        result.insert(class, weighted);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(pairs: &[(i32, &[&str])]) -> BTreeMap<i32, Vec<String>> {
        pairs
            .iter()
            .map(|(c, docs)| (*c, docs.iter().map(|d| d.to_string()).collect()))
            .collect()
    }

    #[test]
    fn hand_evaluated_two_class_example() {
        let docs = classes(&[(0, &["vote vote ballot"]), (1, &["recipe pasta"])]);
        let keywords = ctfidf_keywords(&docs, 10);
        // Class 0: tf(vote)=2 of 5 terms; idf=ln(1+4/2), its top term.
        assert_eq!(keywords[&0][0].0, "vote");
        let expected = (2.0 / 5.0) * (1.0_f64 + 4.0 / 2.0).ln();
        assert!((keywords[&0][0].1 - expected).abs() < 1e-12);
        // Class 1 is a three-way tie; lexicographic order puts pasta first.
        assert_eq!(keywords[&1][0].0, "pasta");
    }

    #[test]
    fn exclusive_term_outranks_shared_term_of_equal_tf() {
        let docs = classes(&[
            (0, &["alpha shared"]),
            (1, &["beta shared"]),
            (2, &["gamma shared"]),
        ]);
        let keywords = ctfidf_keywords(&docs, 10);
        for (class, exclusive) in [(0, "alpha"), (1, "beta"), (2, "gamma")] {
            let list = &keywords[&class];
            let pos_exclusive = list.iter().position(|(t, _)| t == exclusive).unwrap();
            let pos_shared = list.iter().position(|(t, _)| t == "shared").unwrap();
            assert!(pos_exclusive < pos_shared);
        }
    }

    #[test]
    fn single_class_ranking_equals_tf_order() {
        let docs = classes(&[(0, &["a a a b b c"])]);
        let keywords = ctfidf_keywords(&docs, 3);
        let terms: Vec<&str> = keywords[&0].iter().map(|(t, _)| t.as_str()).collect();
        // tf: a=3, then the tf=2 tie {b, "a a"} breaks lexicographically.
        assert_eq!(terms, vec!["a", "a a", "b"]);
        let weights: Vec<f64> = keywords[&0].iter().map(|(_, w)| *w).collect();
        assert!(weights[0] > weights[1]);
        assert_eq!(weights[1], weights[2]);
    }

    #[test]
    fn empty_class_yields_empty_list() {
        let docs = classes(&[(0, &[""]), (1, &["words here"])]);
        let keywords = ctfidf_keywords(&docs, 5);
        assert!(keywords[&0].is_empty());
        assert!(!keywords[&1].is_empty());
    }

    #[test]
    fn weights_nonnegative_and_doc_order_irrelevant() {
        let forward = classes(&[(0, &["x y", "z w"]), (1, &["q"])]);
        let backward = classes(&[(0, &["z w", "x y"]), (1, &["q"])]);
        let a = ctfidf_keywords(&forward, 10);
        let b = ctfidf_keywords(&backward, 10);
        assert_eq!(a, b);
        for list in a.values() {
            for (_, w) in list {
                assert!(*w >= 0.0);
            }
        }
    }

    #[test]
    fn hashtag_prefix_survives_tokenization() {
        assert_eq!(tokenize("#Vote now!"), vec!["#vote", "now"]);
        assert_eq!(tokenize("mid#term"), vec!["mid", "term"]);
        assert_eq!(tokenize("# alone"), vec!["alone"]);
    }
}
