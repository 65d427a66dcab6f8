//! Few-shot prompt construction for both generation strategies.
//!
//! Template text is fixed; example texts are spliced in literally, with no
//! escape or placeholder semantics, so braces in posts cannot inject
//! anything.

use serde::{Deserialize, Serialize};

use super::SamplingError;
use crate::corpus::PlatformId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Mptm,
    PerPlatform,
}

impl Strategy {
    pub fn slug(&self) -> &'static str {
        match self {
            Strategy::Mptm => "mptm",
            Strategy::PerPlatform => "per-platform",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

/// Multi-platform prompts carry 9 examples and request 5 outputs.
pub const MPTM_EXAMPLE_COUNT: usize = 9;
pub const MPTM_OUTPUT_COUNT: usize = 5;
/// Per-platform prompts carry 3 examples and request 2 outputs.
pub const PER_PLATFORM_EXAMPLE_COUNT: usize = 3;
pub const PER_PLATFORM_OUTPUT_COUNT: usize = 2;

const MPTM_HEADER: &str = "You are a social media content generator. I'm going to show you some example posts, \nand I want you to generate new posts that are similar in style, tone, and content,\nbut not identical. The generated posts should look like they could come from\nthe same types of users and platforms as the examples.\nHere are some examples of the kind of posts I'm looking for:\n{\n";

const MPTM_FOOTER: &str = "}\nPlease generate 5 new posts that are similar to these examples. Make them realistic\nand varied.The posts should be about similar topics and use similar language \npatterns as well as be of similar length. Return just the posts without any \nadditional commentary.";

const PER_PLATFORM_HEADER: &str = "Using following examples, generate 2 new social media posts, keeping them true to \ntheir content and writing style.\n\n";

const PER_PLATFORM_FOOTER: &str = "        \nConsider the three examples I gave you and generate the two outputs according to \nthem ";

/// One rendered prompt plus its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptJob {
    pub strategy: Strategy,
    pub examples: Vec<String>,
    pub requested_outputs: usize,
    /// Target platform; per-platform strategy only.
    pub platform: Option<PlatformId>,
    pub prompt: String,
}

fn check_examples(examples: &[String], expected: usize) -> Result<(), SamplingError> {
    if examples.len() != expected {
        return Err(SamplingError::WrongExampleCount {
            expected,
            got: examples.len(),
        });
    }
    for (i, example) in examples.iter().enumerate() {
        if example.is_empty() {
            return Err(SamplingError::EmptyExample(i));
        }
    }
    Ok(())
}

/// Render the multi-platform prompt with exactly 9 examples.
pub fn build_mptm_prompt(examples: &[String]) -> Result<PromptJob, SamplingError> {
    check_examples(examples, MPTM_EXAMPLE_COUNT)?;
    let mut prompt = String::with_capacity(
        MPTM_HEADER.len()
            + MPTM_FOOTER.len()
            + examples.iter().map(|e| e.len() + 16).sum::<usize>(),
    );
    prompt.push_str(MPTM_HEADER);
    for (i, example) in examples.iter().enumerate() {
        prompt.push_str(&format!("Example {}: {};\n", i + 1, example));
    }
    prompt.push_str(MPTM_FOOTER);
    Ok(PromptJob {
        strategy: Strategy::Mptm,
        examples: examples.to_vec(),
        requested_outputs: MPTM_OUTPUT_COUNT,
        platform: None,
        prompt,
    })
}

/// Render the per-platform prompt with exactly 3 examples.
pub fn build_per_platform_prompt(
    examples: &[String],
    platform: &PlatformId,
) -> Result<PromptJob, SamplingError> {
    check_examples(examples, PER_PLATFORM_EXAMPLE_COUNT)?;
    let mut prompt = String::with_capacity(
        PER_PLATFORM_HEADER.len()
            + PER_PLATFORM_FOOTER.len()
            + examples.iter().map(|e| e.len() + 20).sum::<usize>(),
    );
    prompt.push_str(PER_PLATFORM_HEADER);
    for (i, example) in examples.iter().enumerate() {
        prompt.push_str(&format!("        Example {}: {}\n", i + 1, example));
    }
    prompt.push_str(PER_PLATFORM_FOOTER);
    Ok(PromptJob {
        strategy: Strategy::PerPlatform,
        examples: examples.to_vec(),
        requested_outputs: PER_PLATFORM_OUTPUT_COUNT,
        platform: Some(platform.clone()),
        prompt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn examples(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("example text {i}")).collect()
    }

    #[test]
    fn mptm_prompt_contains_template_sentences_and_examples() {
        let ex = examples(9);
        let job = build_mptm_prompt(&ex).unwrap();
        assert!(job
            .prompt
            .starts_with("You are a social media content generator."));
        assert!(job.prompt.contains("Please generate 5 new posts"));
        assert!(job.prompt.contains("generate 5 new posts"));
        for e in &ex {
            assert!(job.prompt.contains(e));
        }
        assert_eq!(job.requested_outputs, 5);
    }

    #[test]
    fn per_platform_prompt_contains_template_sentences() {
        let ex = examples(3);
        let platform = PlatformId::new("twitter").unwrap();
        let job = build_per_platform_prompt(&ex, &platform).unwrap();
        assert!(job
            .prompt
            .contains("generate 2 new social media posts"));
        assert!(job
            .prompt
            .contains("Consider the three examples I gave you"));
        for e in &ex {
            assert!(job.prompt.contains(e));
        }
        assert_eq!(job.requested_outputs, 2);
        assert_eq!(job.platform.as_ref().unwrap().as_str(), "twitter");
    }

    #[test]
    fn wrong_example_counts_rejected() {
        assert!(matches!(
            build_mptm_prompt(&examples(8)),
            Err(SamplingError::WrongExampleCount { expected: 9, got: 8 })
        ));
        let platform = PlatformId::new("twitter").unwrap();
        assert!(matches!(
            build_per_platform_prompt(&examples(4), &platform),
            Err(SamplingError::WrongExampleCount { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn empty_example_rejected() {
        let mut ex = examples(3);
        ex[1] = String::new();
        let platform = PlatformId::new("x").unwrap();
        assert!(matches!(
            build_per_platform_prompt(&ex, &platform),
            Err(SamplingError::EmptyExample(1))
        ));
    }

    #[test]
    fn braces_render_verbatim() {
        let mut ex = examples(9);
        ex[0] = "curly {0} and {weird} braces".to_string();
        let job = build_mptm_prompt(&ex).unwrap();
        assert!(job.prompt.contains("curly {0} and {weird} braces"));
    }

    #[test]
    fn duplicate_examples_permitted() {
        let ex = vec!["same".to_string(); 3];
        let platform = PlatformId::new("x").unwrap();
        let job = build_per_platform_prompt(&ex, &platform).unwrap();
        assert_eq!(job.prompt.matches("same").count(), 3);
    }

    #[test]
    fn rendering_injective_for_distinct_example_lists() {
        let a = build_mptm_prompt(&examples(9)).unwrap();
        let mut other = examples(9);
        other[8] = "different".to_string();
        let b = build_mptm_prompt(&other).unwrap();
        assert_ne!(a.prompt, b.prompt);
        // Order matters too.
        let mut reordered = examples(9);
        reordered.swap(0, 1);
        let c = build_mptm_prompt(&reordered).unwrap();
        assert_ne!(a.prompt, c.prompt);
    }
}
