//! Toolkit for generating synthetic multi-platform social-media corpora with
//! LLM prompting and scoring them against real corpora.
//!
//! The pipeline has two halves:
//!
//! * **Generation** — topic-model a set of real corpora ([`topic`]), draw
//!   topic-coherent sample pools across platforms ([`sampling`]), render
//!   few-shot prompts, and parse model completions into a synthetic [`corpus`].
//! * **Evaluation** — compare a synthetic corpus against the real one on
//!   lexical traits, sentiment, topic overlap, embedding similarity and
//!   named-entity structure ([`fidelity`], [`nergraph`]), assembling
//!   everything into a [`report`].
//!
//! Model-backed capabilities (chat, embeddings, sentiment, NER) sit behind
//! the [`providers`] traits, with deterministic local baselines so the whole
//! pipeline runs offline and bit-reproducibly from a single seed.
//!
//! With the `parallel` feature (default) the data-parallel inner loops run on
//! rayon; reductions keep a fixed order so results are identical across
//! thread counts and with the sequential fallback.

pub mod corpus;
pub mod fidelity;
pub mod nergraph;
pub(crate) mod par;
pub mod providers;
pub mod report;
pub mod sampling;
pub(crate) mod seeds;
pub mod topic;

pub use corpus::{Corpus, LexicalProfile, Origin, PlatformId, Post};
pub use providers::{EmbeddingVector, EntityMention, ProviderConfig, SentimentScores};
pub use report::{FidelityReport, RunConfig};
pub use topic::TopicModel;
