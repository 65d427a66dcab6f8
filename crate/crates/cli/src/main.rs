//! Command-line interface for the synthcorpus toolkit.
//!
//! Subcommands cover the whole pipeline: `ingest` validates and normalizes
//! a corpus, `topics` fits and serializes a topic model, `sample` emits a
//! sample pool, `generate` runs a generation campaign, `eval` produces the
//! full fidelity report and `report` re-renders report files.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 runtime error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use synthcorpus::corpus::{ingest_jsonl, write_jsonl, Corpus, PlatformId, StopwordList};
use synthcorpus::providers::{
    Embedder, GazetteerNer, LexiconSentiment, MockChat, MockEmbedder, RemoteChat, RemoteEmbedder,
};
use synthcorpus::report::{
    evaluate, render_report_files, EvalOptions, EvalProviders, FidelityReport, RunConfig,
};
use synthcorpus::sampling::{generate_synthetic_corpus, get_sample, GenerationParams, Strategy};
use synthcorpus::topic::{get_topics, TopicModel, TopicModelParams};

#[derive(Parser)]
#[command(
    name = "synthcorpus",
    version,
    about = "Generate synthetic multi-platform social media corpora and score their fidelity"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the deterministic offline baselines instead of remote providers.
    #[arg(long, global = true)]
    mock_providers: bool,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Real corpus JSONL file(s); repeatable. Overrides the config file.
    #[arg(long)]
    real: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize a corpus JSONL file.
    Ingest {
        /// Corpus to validate.
        #[arg(long)]
        input: PathBuf,
        /// Normalized output path (default: `<out>/normalized.jsonl`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a topic model over the real corpora and serialize it.
    Topics {
        #[command(flatten)]
        corpora: CorpusArgs,
    },
    /// Draw one topic-coherent sample pool and write it as JSON.
    Sample {
        #[command(flatten)]
        corpora: CorpusArgs,
        /// Serialized topic model; fitted on the fly when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Per-platform pool cap.
        #[arg(short, long)]
        m: Option<usize>,
    },
    /// Run a generation campaign and write the synthetic corpus.
    Generate {
        #[command(flatten)]
        corpora: CorpusArgs,
        /// Prompting strategy.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        /// Number of prompt jobs.
        #[arg(long)]
        jobs: Option<usize>,
        /// Target platform for per-platform prompting.
        #[arg(long)]
        platform: Option<String>,
        /// Serialized topic model; fitted on the fly when omitted (MPTM).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Reuse one sample pool for all jobs instead of a fresh topic per job.
        #[arg(long)]
        single_topic: bool,
    },
    /// Compare a synthetic corpus against the real one and write the report.
    Eval {
        #[command(flatten)]
        corpora: CorpusArgs,
        /// Synthetic corpus JSONL. Overrides the config file.
        #[arg(long)]
        synth: Option<PathBuf>,
    },
    /// Re-render report.md, CSV tables and SVG strips from report.json.
    Report {
        /// Directory holding report.json (default: the output directory).
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn parse_strategy(value: &str) -> Result<Strategy, String> {
    match value {
        "mptm" => Ok(Strategy::Mptm),
        "per-platform" | "per_platform" => Ok(Strategy::PerPlatform),
        other => Err(format!(
            "unknown strategy {other:?}; use mptm or per-platform"
        )),
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (including unknown subcommands) exit 1; help
            // and version output still exit 0.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.mock_providers {
        config.providers.mock = true;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }

    match cli.command {
        Command::Ingest { input, output } => cmd_ingest(&config, &input, output.as_deref()),
        Command::Topics { corpora } => {
            apply_corpora(&mut config, &corpora);
            config.validate().map_err(CliError::usage)?;
            cmd_topics(&config)
        }
        Command::Sample { corpora, model, m } => {
            apply_corpora(&mut config, &corpora);
            if let Some(m) = m {
                config.sampling.m = m;
            }
            config.validate().map_err(CliError::usage)?;
            cmd_sample(&config, model.as_deref())
        }
        Command::Generate {
            corpora,
            strategy,
            jobs,
            platform,
            model,
            single_topic,
        } => {
            apply_corpora(&mut config, &corpora);
            if let Some(strategy) = strategy {
                config.sampling.strategy = strategy;
            }
            if let Some(jobs) = jobs {
                config.sampling.n_jobs = jobs;
            }
            if platform.is_some() {
                config.sampling.platform = platform;
            }
            if single_topic {
                config.sampling.single_topic = true;
            }
            config.validate().map_err(CliError::usage)?;
            cmd_generate(&config, model.as_deref())
        }
        Command::Eval { corpora, synth } => {
            apply_corpora(&mut config, &corpora);
            if synth.is_some() {
                config.corpora.synthetic = synth;
            }
            config.validate().map_err(CliError::usage)?;
            cmd_eval(&config)
        }
        Command::Report { dir } => {
            let dir = dir
                .or_else(|| config.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            cmd_report(&dir)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let raw = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            toml::from_str(&raw)
                .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
        }
    }
}

fn apply_corpora(config: &mut RunConfig, args: &CorpusArgs) {
    if !args.real.is_empty() {
        config.corpora.real = args.real.clone();
    }
}

fn out_dir(config: &RunConfig) -> PathBuf {
    config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn ensure_out_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_real_corpora(config: &RunConfig) -> Result<Vec<Corpus>, CliError> {
    if config.corpora.real.is_empty() {
        return Err(CliError::Usage(
            "no real corpora given; pass --real or set corpora.real in the config".to_string(),
        ));
    }
    config
        .corpora
        .real
        .iter()
        .map(|path| ingest_jsonl(path).map_err(CliError::runtime))
        .collect()
}

fn build_embedder(config: &RunConfig) -> Result<Embedder, CliError> {
    if config.providers.mock {
        Ok(Embedder::new(Box::new(MockEmbedder::new())))
    } else {
        let provider_config = config.providers.embedding.clone().ok_or(CliError::Usage(
            "missing config key providers.embedding".into(),
        ))?;
        Ok(Embedder::new(Box::new(
            RemoteEmbedder::new(provider_config).map_err(CliError::usage)?,
        )))
    }
}

/// Entities for the offline NER baseline when no gazetteer file is given:
/// capitalized token runs (up to three tokens) seen at least twice across
/// the real corpora.
fn derive_gazetteer(corpora: &[Corpus]) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for corpus in corpora {
        for post in corpus.posts() {
            let tokens: Vec<&str> = post.text.split_whitespace().collect();
            let mut run: Vec<String> = Vec::new();
            for token in tokens.iter().chain(std::iter::once(&"")) {
                let word = token.trim_matches(|c: char| !c.is_alphanumeric());
                let capitalized = word.chars().next().is_some_and(|c| c.is_uppercase());
                if capitalized && run.len() < 3 {
                    run.push(word.to_lowercase());
                } else {
                    if !run.is_empty() {
                        *counts.entry(run.join(" ")).or_default() += 1;
                        run.clear();
                    }
                    if capitalized {
                        run.push(word.to_lowercase());
                    }
                }
            }
        }
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(entity, _)| entity)
        .collect()
}

fn build_eval_providers(
    config: &RunConfig,
    real_corpora: &[Corpus],
) -> Result<EvalProviders, CliError> {
    let embedder = build_embedder(config)?;
    let sentiment = match config.providers.sentiment.as_deref() {
        Some("lexicon") | None => Some(Box::new(LexiconSentiment::english()) as _),
        Some(other) => {
            log::warn!("unknown sentiment classifier {other:?}; section will be skipped");
            None
        }
    };
    let ner = match &config.providers.ner_gazetteer {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::runtime(format!("cannot read gazetteer: {e}")))?;
            let entries: Vec<String> = raw
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
            Some(Box::new(GazetteerNer::new(entries)) as _)
        }
        None => {
            let derived = derive_gazetteer(real_corpora);
            if derived.is_empty() {
                None
            } else {
                log::info!(
                    "derived {} gazetteer entries from the real corpora",
                    derived.len()
                );
                Some(Box::new(GazetteerNer::new(derived)) as _)
            }
        }
    };
    Ok(EvalProviders {
        embedder,
        sentiment,
        ner,
    })
}

fn topic_params(config: &RunConfig) -> TopicModelParams {
    TopicModelParams {
        min_topic_size: config.evaluation.min_topic_size,
        vector_mode: config.evaluation.topic_vector_mode,
        ..Default::default()
    }
}

fn cmd_ingest(config: &RunConfig, input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let corpus = ingest_jsonl(input).map_err(CliError::runtime)?;
    let target = match output {
        Some(path) => path.to_path_buf(),
        None => ensure_out_dir(config)?.join("normalized.jsonl"),
    };
    write_jsonl(&corpus, &target).map_err(CliError::runtime)?;
    println!(
        "ingested {} posts across {} platforms -> {}",
        corpus.len(),
        corpus.platforms().len(),
        target.display()
    );
    Ok(())
}

fn fit_model(config: &RunConfig, corpora: &[Corpus]) -> Result<TopicModel, CliError> {
    let refs: Vec<&Corpus> = corpora.iter().collect();
    let embedder = build_embedder(config)?;
    get_topics(
        &refs,
        &embedder,
        &StopwordList::default_bundle(),
        &topic_params(config),
        config.seed,
    )
    .map_err(CliError::runtime)
}

fn load_or_fit_model(
    config: &RunConfig,
    corpora: &[Corpus],
    model_path: Option<&Path>,
) -> Result<TopicModel, CliError> {
    match model_path {
        Some(path) => TopicModel::load(path).map_err(CliError::runtime),
        None => fit_model(config, corpora),
    }
}

fn cmd_topics(config: &RunConfig) -> Result<(), CliError> {
    let corpora = load_real_corpora(config)?;
    let model = fit_model(config, &corpora)?;
    let dir = ensure_out_dir(config)?;
    let path = dir.join("topicmodel.json");
    model.save(&path).map_err(CliError::runtime)?;
    println!(
        "fitted {} topics over {} posts -> {}",
        model.topics().len(),
        model.labels().len(),
        path.display()
    );
    for topic in model.topics() {
        let keywords: Vec<&str> = topic
            .keywords
            .iter()
            .take(3)
            .map(|k| k.term.as_str())
            .collect();
        println!(
            "  topic {} ({} posts): {}",
            topic.id,
            topic.size,
            keywords.join(", ")
        );
    }
    Ok(())
}

fn cmd_sample(config: &RunConfig, model_path: Option<&Path>) -> Result<(), CliError> {
    let corpora = load_real_corpora(config)?;
    let model = load_or_fit_model(config, &corpora, model_path)?;
    let refs: Vec<&Corpus> = corpora.iter().collect();
    let pool =
        get_sample(&model, &refs, config.sampling.m, config.seed).map_err(CliError::runtime)?;
    let dir = ensure_out_dir(config)?;
    let path = dir.join("samplepool.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&pool).expect("pool serializes"),
    )
    .map_err(|e| CliError::runtime(format!("cannot write pool: {e}")))?;
    println!(
        "sample pool for topic {}: {} posts -> {}",
        pool.topic_id,
        pool.posts.len(),
        path.display()
    );
    Ok(())
}

fn cmd_generate(config: &RunConfig, model_path: Option<&Path>) -> Result<(), CliError> {
    let corpora = load_real_corpora(config)?;
    let refs: Vec<&Corpus> = corpora.iter().collect();

    let model = match config.sampling.strategy {
        Strategy::Mptm => Some(load_or_fit_model(config, &corpora, model_path)?),
        Strategy::PerPlatform => None,
    };

    let mut params = GenerationParams::new(config.sampling.strategy, config.sampling.n_jobs);
    params.pool_cap = config.sampling.m;
    params.single_topic = config.sampling.single_topic;
    params.dedup_examples = config.sampling.dedup_examples;
    params.platform = config
        .sampling
        .platform
        .as_deref()
        .map(|p| PlatformId::new(p).map_err(CliError::Usage))
        .transpose()?;

    let result = if config.providers.mock {
        let chat = MockChat::new(config.seed);
        generate_synthetic_corpus(&refs, model.as_ref(), &chat, &params, config.seed)
    } else {
        let chat_config = config
            .providers
            .chat
            .clone()
            .ok_or(CliError::Usage("missing config key providers.chat".into()))?;
        let chat = RemoteChat::new(chat_config).map_err(CliError::usage)?;
        generate_synthetic_corpus(&refs, model.as_ref(), &chat, &params, config.seed)
    };
    let (synthetic, run) = result.map_err(CliError::runtime)?;

    let dir = ensure_out_dir(config)?;
    let corpus_path = dir.join("synthetic.jsonl");
    write_jsonl(&synthetic, &corpus_path).map_err(CliError::runtime)?;
    let manifest_path = dir.join("generation_manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&run).expect("run serializes"),
    )
    .map_err(|e| CliError::runtime(format!("cannot write manifest: {e}")))?;
    println!(
        "generated {} posts over {} jobs ({} rejects) -> {}",
        run.posts_produced,
        run.jobs_issued,
        run.rejected_total(),
        corpus_path.display()
    );
    Ok(())
}

fn merge_real(corpora: Vec<Corpus>) -> Result<Corpus, CliError> {
    let mut posts = Vec::new();
    for corpus in corpora {
        posts.extend(corpus.posts().iter().cloned());
    }
    Corpus::new(posts).map_err(CliError::runtime)
}

fn cmd_eval(config: &RunConfig) -> Result<(), CliError> {
    let real_corpora = load_real_corpora(config)?;
    let synth_path = config.corpora.synthetic.clone().ok_or(CliError::Usage(
        "no synthetic corpus given; pass --synth or set corpora.synthetic".to_string(),
    ))?;
    let synth = ingest_jsonl(&synth_path).map_err(CliError::runtime)?;

    let providers = build_eval_providers(config, &real_corpora)?;
    let real = merge_real(real_corpora)?;

    let strategy = if synth.platforms().iter().any(PlatformId::is_multi) {
        Strategy::Mptm
    } else {
        Strategy::PerPlatform
    };
    let mut options = EvalOptions::new(config.seed, strategy);
    options.thresholds = config.thresholds.clone();
    options.kmeans_k = config.evaluation.kmeans_k;
    options.topic_params = topic_params(config);
    options.config_hash = config.config_hash();

    let report = evaluate(&real, &synth, &providers, &options);
    let dir = ensure_out_dir(config)?;
    let files = render_report_files(&report, &dir).map_err(CliError::runtime)?;
    println!("wrote {} report files to {}", files.len(), dir.display());
    for (name, computed) in [
        ("traits", report.traits.as_computed().is_some()),
        ("sentiment", report.sentiment.as_computed().is_some()),
        ("topics", report.topics.as_computed().is_some()),
        ("similarity", report.similarity.as_computed().is_some()),
        ("centroids", report.centroids.as_computed().is_some()),
        ("entities", report.entities.as_computed().is_some()),
    ] {
        println!("  {}: {}", name, if computed { "computed" } else { "skipped" });
    }
    Ok(())
}

fn cmd_report(dir: &Path) -> Result<(), CliError> {
    let path = dir.join("report.json");
    let raw = std::fs::read_to_string(&path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    let report: FidelityReport = serde_json::from_str(&raw)
        .map_err(|e| CliError::runtime(format!("invalid report.json: {e}")))?;
    let files = render_report_files(&report, dir).map_err(CliError::runtime)?;
    println!("re-rendered {} files in {}", files.len(), dir.display());
    Ok(())
}
