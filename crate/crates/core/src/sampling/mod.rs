//! Sample-pool construction, prompt jobs and synthetic corpus assembly.
//!
//! `get_sample` draws topic-coherent examples across platforms: pick a
//! random topic, then sample at most `m` of its posts from each platform.
//! `generate_synthetic_corpus` turns pools into prompt jobs, parses the
//! completions and accounts for every requested output, either as a saved
//! post or a recorded reject.

mod parse;
mod prompt;

pub use parse::parse_llm_output;
pub use prompt::{
    build_mptm_prompt, build_per_platform_prompt, PromptJob, Strategy, MPTM_EXAMPLE_COUNT,
    MPTM_OUTPUT_COUNT, PER_PLATFORM_EXAMPLE_COUNT, PER_PLATFORM_OUTPUT_COUNT,
};

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Origin, PlatformId, Post};
use crate::providers::{ChatProvider, ProviderError};
use crate::seeds;
use crate::topic::TopicModel;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("expected {expected} examples, got {got}")]
    WrongExampleCount { expected: usize, got: usize },
    #[error("empty example at position {0}")]
    EmptyExample(usize),
    #[error("model reports no topics to sample from")]
    NoTopics,
    #[error("pool cap m must be at least 1")]
    BadPoolCap,
    #[error("unparseable completion")]
    Unparseable,
    #[error("strategy {0} requires a fitted topic model")]
    ModelRequired(Strategy),
    #[error("platform {platform} has {got} usable posts but {needed} are needed")]
    TooFewPlatformPosts {
        platform: PlatformId,
        got: usize,
        needed: usize,
    },
    #[error("no platforms available for per-platform generation")]
    NoPlatforms,
    #[error("all {0} jobs were rejected")]
    AllJobsRejected(usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Topic-coherent example posts drawn across platforms for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePool {
    pub topic_id: i32,
    pub per_platform_cap: usize,
    pub posts: Vec<Post>,
}

/// Uniformly pick a topic, then sample min(|platform members|, m) posts per
/// platform without replacement. Posts with empty text are not usable as
/// prompt examples and are skipped.
pub fn get_sample(
    model: &TopicModel,
    corpora: &[&Corpus],
    m: usize,
    seed: u64,
) -> Result<SamplePool, SamplingError> {
    if model.topics().is_empty() {
        return Err(SamplingError::NoTopics);
    }
    if m == 0 {
        return Err(SamplingError::BadPoolCap);
    }
    let mut rng = seeds::rng_for(seed, "sample-pool", 0);
    let topic = &model.topics()[rng.random_range(0..model.topics().len())];

    let label_of: HashMap<&str, i32> = model
        .post_ids()
        .iter()
        .map(String::as_str)
        .zip(model.labels().iter().copied())
        .collect();

    let platforms: BTreeSet<&PlatformId> =
        corpora.iter().flat_map(|c| c.platforms().iter()).collect();

    let mut pool = Vec::new();
    for platform in platforms {
        let members: Vec<&Post> = corpora
            .iter()
            .flat_map(|c| c.posts().iter())
            .filter(|p| {
                &p.platform == platform
                    && !p.text.is_empty()
                    && label_of.get(p.id.as_str()) == Some(&topic.id)
            })
            .collect();
        let take = members.len().min(m);
        for index in sample_indices(&mut rng, members.len(), take) {
            pool.push(members[index].clone());
        }
    }
    Ok(SamplePool {
        topic_id: topic.id,
        per_platform_cap: m,
        posts: pool,
    })
}

/// Partial Fisher-Yates: the first `take` entries of a shuffled index
/// range, in draw order.
fn sample_indices(rng: &mut ChaCha8Rng, len: usize, take: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..take {
        let j = rng.random_range(i..len);
        indices.swap(i, j);
    }
    indices.truncate(take);
    indices
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub strategy: Strategy,
    pub n_jobs: usize,
    /// Per-platform cap m for MPTM sample pools.
    pub pool_cap: usize,
    /// Target platform for per-platform prompting; None cycles through the
    /// corpora's platforms in sorted order.
    pub platform: Option<PlatformId>,
    /// Drop outputs that exactly match a prompt example.
    pub dedup_examples: bool,
    /// MPTM: reuse one sample pool for every job instead of drawing a fresh
    /// topic per job.
    pub single_topic: bool,
}

impl GenerationParams {
    pub fn new(strategy: Strategy, n_jobs: usize) -> Self {
        GenerationParams {
            strategy,
            n_jobs,
            pool_cap: 10,
            platform: None,
            dedup_examples: true,
            single_topic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectRecord {
    pub job: usize,
    pub reason: String,
    pub count: usize,
}

/// Bookkeeping for one generation run. Every requested output is accounted
/// for: `posts_produced + rejected_total() == requested_total`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRun {
    pub run_id: String,
    pub seed: u64,
    pub strategy: Strategy,
    pub provider: String,
    pub jobs_issued: usize,
    pub requested_total: usize,
    pub posts_produced: usize,
    pub rejects: Vec<RejectRecord>,
}

impl GenerationRun {
    pub fn rejected_total(&self) -> usize {
        self.rejects.iter().map(|r| r.count).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.posts_produced + self.rejected_total() == self.requested_total
    }
}

/// Run `n_jobs` prompt jobs against the chat provider and assemble the
/// synthetic corpus. Jobs run in index order and every job's randomness
/// comes from its own derived seed, so results are reproducible and
/// independent of the other jobs.
pub fn generate_synthetic_corpus(
    corpora: &[&Corpus],
    model: Option<&TopicModel>,
    chat: &dyn ChatProvider,
    params: &GenerationParams,
    seed: u64,
) -> Result<(Corpus, GenerationRun), SamplingError> {
    let run_id = format!("{}-{}", params.strategy.slug(), seed);
    let platforms: Vec<PlatformId> = corpora
        .iter()
        .flat_map(|c| c.platforms().iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let shared_pool = match (params.strategy, params.single_topic) {
        (Strategy::Mptm, true) => {
            let model = model.ok_or(SamplingError::ModelRequired(Strategy::Mptm))?;
            Some(get_sample(
                model,
                corpora,
                params.pool_cap,
                seeds::child_seed(seed, "pool", u64::MAX),
            )?)
        }
        _ => None,
    };

    let mut posts: Vec<Post> = Vec::new();
    let mut rejects: Vec<RejectRecord> = Vec::new();
    let mut requested_total = 0usize;
    let mut produced = 0usize;

    for job_index in 0..params.n_jobs {
        let job = match build_job(
            corpora,
            model,
            params,
            &platforms,
            shared_pool.as_ref(),
            seed,
            job_index,
        ) {
            Ok(job) => job,
            Err(JobSetupFailure::Fatal(err)) => return Err(err),
            Err(JobSetupFailure::Reject { reason, requested }) => {
                requested_total += requested;
                rejects.push(RejectRecord {
                    job: job_index,
                    reason,
                    count: requested,
                });
                continue;
            }
        };
        requested_total += job.requested_outputs;

        let raw = match chat.chat_complete(&job.prompt) {
            Ok(raw) => raw,
            Err(err) => {
                rejects.push(RejectRecord {
                    job: job_index,
                    reason: format!("provider failure: {err}"),
                    count: job.requested_outputs,
                });
                continue;
            }
        };
        let parsed = match parse_llm_output(&raw, job.requested_outputs) {
            Ok(items) => items,
            Err(_) => {
                rejects.push(RejectRecord {
                    job: job_index,
                    reason: "unparseable completion".to_string(),
                    count: job.requested_outputs,
                });
                continue;
            }
        };

        let shortfall = job.requested_outputs - parsed.len();
        if shortfall > 0 {
            rejects.push(RejectRecord {
                job: job_index,
                reason: "missing outputs".to_string(),
                count: shortfall,
            });
        }
        for (k, text) in parsed.into_iter().enumerate() {
            if params.dedup_examples && job.examples.iter().any(|e| e == &text) {
                rejects.push(RejectRecord {
                    job: job_index,
                    reason: "verbatim duplicate of example".to_string(),
                    count: 1,
                });
                continue;
            }
            let platform = job.platform.clone().unwrap_or_else(PlatformId::multi);
            posts.push(Post {
                id: format!("syn-{run_id}-{job_index}-{k}"),
                platform,
                text,
                origin: Origin::Synthetic,
                provider: Some(chat.label().to_string()),
            });
            produced += 1;
        }
    }

    if produced == 0 {
        return Err(SamplingError::AllJobsRejected(params.n_jobs));
    }
    let corpus = Corpus::new(posts)?;
    let run = GenerationRun {
        run_id,
        seed,
        strategy: params.strategy,
        provider: chat.label().to_string(),
        jobs_issued: params.n_jobs,
        requested_total,
        posts_produced: produced,
        rejects,
    };
    debug_assert!(run.is_balanced());
    Ok((corpus, run))
}

enum JobSetupFailure {
    /// Violated precondition; abort the run.
    Fatal(SamplingError),
    /// This job cannot run but the run continues.
    Reject { reason: String, requested: usize },
}

fn build_job(
    corpora: &[&Corpus],
    model: Option<&TopicModel>,
    params: &GenerationParams,
    platforms: &[PlatformId],
    shared_pool: Option<&SamplePool>,
    seed: u64,
    job_index: usize,
) -> Result<PromptJob, JobSetupFailure> {
    let mut rng = seeds::rng_for(seed, "examples", job_index as u64);
    match params.strategy {
        Strategy::Mptm => {
            let pool_storage;
            let pool = match shared_pool {
                Some(pool) => pool,
                None => {
                    let model = model.ok_or(JobSetupFailure::Fatal(
                        SamplingError::ModelRequired(Strategy::Mptm),
                    ))?;
                    pool_storage = get_sample(
                        model,
                        corpora,
                        params.pool_cap,
                        seeds::child_seed(seed, "pool", job_index as u64),
                    )
                    .map_err(JobSetupFailure::Fatal)?;
                    &pool_storage
                }
            };
            if pool.posts.len() < MPTM_EXAMPLE_COUNT {
                return Err(JobSetupFailure::Reject {
                    reason: format!(
                        "sample pool for topic {} has {} posts, {} needed",
                        pool.topic_id,
                        pool.posts.len(),
                        MPTM_EXAMPLE_COUNT
                    ),
                    requested: MPTM_OUTPUT_COUNT,
                });
            }
            let examples: Vec<String> =
                sample_indices(&mut rng, pool.posts.len(), MPTM_EXAMPLE_COUNT)
                    .into_iter()
                    .map(|i| pool.posts[i].text.clone())
                    .collect();
            build_mptm_prompt(&examples).map_err(JobSetupFailure::Fatal)
        }
        Strategy::PerPlatform => {
            let target = match &params.platform {
                Some(platform) => platform.clone(),
                None => {
                    if platforms.is_empty() {
                        return Err(JobSetupFailure::Fatal(SamplingError::NoPlatforms));
                    }
                    platforms[job_index % platforms.len()].clone()
                }
            };
            let candidates: Vec<&Post> = corpora
                .iter()
                .flat_map(|c| c.posts().iter())
                .filter(|p| p.platform == target && !p.text.is_empty())
                .collect();
            if candidates.len() < PER_PLATFORM_EXAMPLE_COUNT {
                return Err(JobSetupFailure::Fatal(
                    SamplingError::TooFewPlatformPosts {
                        platform: target,
                        got: candidates.len(),
                        needed: PER_PLATFORM_EXAMPLE_COUNT,
                    },
                ));
            }
            let examples: Vec<String> =
                sample_indices(&mut rng, candidates.len(), PER_PLATFORM_EXAMPLE_COUNT)
                    .into_iter()
                    .map(|i| candidates[i].text.clone())
                    .collect();
            build_per_platform_prompt(&examples, &target).map_err(JobSetupFailure::Fatal)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{EmbeddingVector, MockChat};
    use crate::topic::{Topic, TopicModelParams};

    fn post(id: &str, platform: &str, text: &str) -> Post {
        Post {
            id: id.to_string(),
            platform: PlatformId::new(platform).unwrap(),
            text: text.to_string(),
            origin: Origin::Real,
            provider: None,
        }
    }

    /// One-topic model over three platforms with uneven membership:
    /// twitter 4 posts, reddit 4 posts, facebook 2 posts, all in cluster 0.
    fn fixture() -> (Corpus, TopicModel) {
        let mut posts = Vec::new();
        for i in 0..4 {
            posts.push(post(&format!("t{i}"), "twitter", &format!("tweet {i} vote")));
        }
        for i in 0..4 {
            posts.push(post(&format!("r{i}"), "reddit", &format!("thread {i} vote")));
        }
        for i in 0..2 {
            posts.push(post(&format!("f{i}"), "facebook", &format!("status {i} vote")));
        }
        let corpus = Corpus::new(posts).unwrap();
        let ids: Vec<String> = corpus.posts().iter().map(|p| p.id.clone()).collect();
        let labels = vec![0; ids.len()];
        let topic = Topic {
            id: 0,
            size: ids.len(),
            keywords: Vec::new(),
            member_post_ids: ids.clone(),
            vector: EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]),
        };
        let model = TopicModel::from_parts(
            7,
            "mock-embed",
            4,
            TopicModelParams::default(),
            ids,
            labels,
            vec![topic],
            Vec::new(),
            Vec::new(),
        )
        .unwrap();
        (corpus, model)
    }

    #[test]
    fn saturated_pool_takes_m_per_platform() {
        let (corpus, model) = fixture();
        let pool = get_sample(&model, &[&corpus], 2, 1).unwrap();
        // 3 platforms, each with >= 2 members.
        assert_eq!(pool.posts.len(), 6);
    }

    #[test]
    fn min_rule_caps_small_platforms() {
        let (corpus, model) = fixture();
        let pool = get_sample(&model, &[&corpus], 5, 1).unwrap();
        let facebook = PlatformId::new("facebook").unwrap();
        let fb = pool.posts.iter().filter(|p| p.platform == facebook).count();
        assert_eq!(fb, 2);
        let twitter = PlatformId::new("twitter").unwrap();
        let tw = pool.posts.iter().filter(|p| p.platform == twitter).count();
        assert_eq!(tw, 4);
    }

    #[test]
    fn pool_is_deterministic_per_seed() {
        let (corpus, model) = fixture();
        let a = get_sample(&model, &[&corpus], 3, 42).unwrap();
        let b = get_sample(&model, &[&corpus], 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pool_is_topic_pure() {
        let (corpus, model) = fixture();
        let pool = get_sample(&model, &[&corpus], 3, 9).unwrap();
        for p in &pool.posts {
            assert_eq!(model.label_of(&p.id), Some(pool.topic_id));
        }
    }

    #[test]
    fn empty_topics_or_zero_cap_rejected() {
        let (corpus, model) = fixture();
        assert!(matches!(
            get_sample(&model, &[&corpus], 0, 1),
            Err(SamplingError::BadPoolCap)
        ));
        let empty = TopicModel::from_parts(
            1,
            "mock-embed",
            4,
            TopicModelParams::default(),
            vec![],
            vec![],
            vec![],
            Vec::new(),
            Vec::new(),
        )
        .unwrap();
        assert!(matches!(
            get_sample(&empty, &[&corpus], 3, 1),
            Err(SamplingError::NoTopics)
        ));
    }

    #[test]
    fn mptm_generation_produces_jobs_times_five() {
        let (corpus, model) = fixture();
        let chat = MockChat::new(7);
        let params = GenerationParams::new(Strategy::Mptm, 3);
        let (synthetic, run) =
            generate_synthetic_corpus(&[&corpus], Some(&model), &chat, &params, 7).unwrap();
        assert_eq!(synthetic.len(), 15);
        assert_eq!(run.posts_produced, 15);
        assert_eq!(run.requested_total, 15);
        assert!(run.rejects.is_empty());
        assert!(run.is_balanced());
        for p in synthetic.posts() {
            assert!(p.platform.is_multi());
            assert_eq!(p.origin, Origin::Synthetic);
            assert_eq!(p.provider.as_deref(), Some("mock-chat"));
        }
    }

    #[test]
    fn per_platform_generation_tags_target_platform() {
        let (corpus, _) = fixture();
        let chat = MockChat::new(3);
        let mut params = GenerationParams::new(Strategy::PerPlatform, 2);
        params.platform = Some(PlatformId::new("twitter").unwrap());
        let (synthetic, run) =
            generate_synthetic_corpus(&[&corpus], None, &chat, &params, 3).unwrap();
        assert_eq!(synthetic.len(), 4);
        assert!(run.is_balanced());
        let twitter = PlatformId::new("twitter").unwrap();
        for p in synthetic.posts() {
            assert_eq!(p.platform, twitter);
        }
    }

    #[test]
    fn per_platform_requires_three_posts() {
        let corpus = Corpus::new(vec![
            post("a", "tiktok", "one"),
            post("b", "tiktok", "two"),
        ])
        .unwrap();
        let chat = MockChat::new(1);
        let mut params = GenerationParams::new(Strategy::PerPlatform, 1);
        params.platform = Some(PlatformId::new("tiktok").unwrap());
        assert!(matches!(
            generate_synthetic_corpus(&[&corpus], None, &chat, &params, 1),
            Err(SamplingError::TooFewPlatformPosts { .. })
        ));
    }

    #[test]
    fn generation_is_reproducible_from_seed() {
        let (corpus, model) = fixture();
        let chat = MockChat::new(11);
        let params = GenerationParams::new(Strategy::Mptm, 4);
        let (a, run_a) =
            generate_synthetic_corpus(&[&corpus], Some(&model), &chat, &params, 11).unwrap();
        let (b, run_b) =
            generate_synthetic_corpus(&[&corpus], Some(&model), &chat, &params, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(run_a, run_b);
        let chat2 = MockChat::new(12);
        let (c, _) =
            generate_synthetic_corpus(&[&corpus], Some(&model), &chat2, &params, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn verbatim_example_echo_is_rejected_and_accounted() {
        struct EchoChat;
        impl crate::providers::ChatProvider for EchoChat {
            fn label(&self) -> &str {
                "echo-chat"
            }
            fn chat_complete(&self, prompt: &str) -> Result<String, crate::providers::ProviderError> {
                // Parrot the first example back, then produce one fresh item.
                let example = prompt
                    .lines()
                    .find_map(|l| l.trim().strip_prefix("Example 1: "))
                    .unwrap()
                    .trim_end_matches(';');
                Ok(format!("1. {example}\n2. brand new text"))
            }
        }
        let (corpus, _) = fixture();
        let mut params = GenerationParams::new(Strategy::PerPlatform, 1);
        params.platform = Some(PlatformId::new("twitter").unwrap());
        let (synthetic, run) =
            generate_synthetic_corpus(&[&corpus], None, &EchoChat, &params, 2).unwrap();
        assert_eq!(synthetic.len(), 1);
        assert_eq!(run.posts_produced, 1);
        assert_eq!(run.rejected_total(), 1);
        assert!(run.is_balanced());
        assert!(run.rejects[0].reason.contains("duplicate"));
        assert_eq!(synthetic.posts()[0].text, "brand new text");
    }

    #[test]
    fn round_robin_covers_platforms() {
        let mut posts = Vec::new();
        for platform in ["twitter", "reddit", "facebook"] {
            for i in 0..3 {
                posts.push(post(
                    &format!("{platform}{i}"),
                    platform,
                    &format!("{platform} text {i} words"),
                ));
            }
        }
        let corpus = Corpus::new(posts).unwrap();
        let chat = MockChat::new(5);
        let mut params = GenerationParams::new(Strategy::PerPlatform, 3);
        params.platform = None;
        let (synthetic, _) =
            generate_synthetic_corpus(&[&corpus], None, &chat, &params, 5).unwrap();
        let platforms: BTreeSet<&str> = synthetic
            .posts()
            .iter()
            .map(|p| p.platform.as_str())
            .collect();
        assert_eq!(platforms, BTreeSet::from(["facebook", "reddit", "twitter"]));
    }
}
