//! Parsing and cleaning of raw LLM completions.

use std::sync::OnceLock;

use regex::Regex;

use super::SamplingError;

fn enumerator_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*(?:post\s+\d+\s*:|\d+\s*[.):]\s*|[-*•]\s+)").expect("static regex")
    })
}

fn commentary_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^(?:here (?:are|is)|here's|sure[,!: ]|certainly[,!: ]|okay[,!: ]|of course)")
            .expect("static regex")
    })
}

/// Split a completion into at most `requested` post texts.
///
/// Items start at blank lines or leading enumerators (`1.`, `1)`, `-`,
/// `Post 1:`); enumerators, wrapping quotes and surrounding whitespace are
/// stripped; empty items and commentary lines are dropped. Excess items are
/// truncated with a warning; zero parseable items is an error and the job
/// counts as a reject.
pub fn parse_llm_output(raw: &str, requested: usize) -> Result<Vec<String>, SamplingError> {
    let mut items: Vec<String> = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, items: &mut Vec<String>| {
        let cleaned = clean_item(current);
        if !cleaned.is_empty() && !commentary_re().is_match(&cleaned) {
            items.push(cleaned);
        }
        current.clear();
    };

    for line in raw.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut items);
            continue;
        }
        if let Some(m) = enumerator_re().find(line) {
            flush(&mut current, &mut items);
            current.push_str(&line[m.end()..]);
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    flush(&mut current, &mut items);

    if items.is_empty() {
        return Err(SamplingError::Unparseable);
    }
    if items.len() > requested {
        log::warn!(
            "completion produced {} items, truncating to the {} requested",
            items.len(),
            requested
        );
        items.truncate(requested);
    }
    Ok(items)
}

fn clean_item(item: &str) -> String {
    let trimmed = item.trim();
    let unquoted = strip_wrapping_quotes(trimmed);
    unquoted.trim().to_string()
}

fn strip_wrapping_quotes(s: &str) -> &str {
    const PAIRS: [(char, char); 4] = [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’')];
    let mut chars = s.chars();
    let (first, last) = match (chars.next(), s.chars().next_back()) {
        (Some(f), Some(l)) => (f, l),
        _ => return s,
    };
    if s.chars().count() >= 2 && PAIRS.iter().any(|&(open, close)| first == open && last == close)
    {
        let start = first.len_utf8();
        let end = s.len() - last.len_utf8();
        &s[start..end]
    } else {
        s
    }
}
