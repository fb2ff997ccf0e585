//! Command-line entry points.
//!
//! Every subcommand accepts `--seed` and `--config <file>`; without
//! `--config` the path in `INTOPIC_CONFIG` is used. The config file holds
//! `key = value` lines named after the model hyperparameters, and unknown
//! keys are rejected. Settings resolve in order: built-in defaults, config
//! file, command-line flags.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use intopic_core::corpus::{
    generate_synthetic_corpus, load_corpus, prepare, synthetic_embeddings, write_corpus,
    SyntheticConfig, DEFAULT_MAX_DF, DEFAULT_MIN_DF,
};
use intopic_core::etm::{load_model, save_model, top_words, train};
use intopic_core::eval::{
    topic_coherence, topic_diversity, CoherenceScores, DEFAULT_COHERENCE_TOP_N,
    DEFAULT_DIVERSITY_TOP_N, DEFAULT_REPORT_TOP_N,
};
use intopic_core::{
    BowCorpus, CooccurrenceStats, EmbeddingTable, EtmConfig, EtmModel, MissingPolicy, RelabelMode,
    RelabelRequest, Tokenizer,
};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::session::{append_action, read_actions, Action, Session, SessionOptions};

#[derive(Debug, Parser)]
#[command(
    name = "intopic",
    version,
    about = "Interactive embedded topic modeling"
)]
pub struct Cli {
    /// Random seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Hyperparameter file with `key = value` lines.
    #[arg(long, global = true, env = "INTOPIC_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize a JSON-lines corpus and write the bag-of-words artifact.
    Ingest(IngestArgs),
    /// Train a model on a bag-of-words artifact and write a checkpoint.
    Train(TrainArgs),
    /// Print NPMI coherence and topic diversity of a checkpoint.
    Eval(EvalArgs),
    /// Apply one relabel after replaying an action log; prints the update record.
    Relabel(RelabelArgs),
    /// Print the BM25 report of the initial model against the replayed state.
    Report(ReportArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// Generate a planted-topic corpus with matching word vectors.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSON-lines corpus with `id`, optional `title` and `text`.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_DF)]
    pub min_df: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DF)]
    pub max_df: f64,
    /// Stopword file, one word per line; replaces the built-in list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub bow: PathBuf,
    /// Word vectors in text format; vocabulary words without a vector get a
    /// seeded random one.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Also train the word embeddings.
    #[arg(long)]
    pub train_rho: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Reference corpus for co-occurrence counts.
    #[arg(long)]
    pub bow: PathBuf,
    #[arg(long, default_value_t = DEFAULT_COHERENCE_TOP_N)]
    pub coherence_top_n: usize,
    #[arg(long, default_value_t = DEFAULT_DIVERSITY_TOP_N)]
    pub diversity_top_n: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub bow: PathBuf,
    /// Stopword file used at ingest, for query tokenization.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RelabelArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// JSON-lines action log. Replayed first; the new action is appended.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub topic: usize,
    #[arg(long)]
    pub word: String,
    /// Defaults to `lambda_default` of the config file, else of the checkpoint.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// embedding_convex, embedding_literal or distribution.
    #[arg(long, default_value_t = RelabelMode::default())]
    pub mode: RelabelMode,
    /// Distribution-mode boost; defaults to the gap to the top word.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = intopic_core::interact::DEFAULT_NEIGHBORS)]
    pub neighbors: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value_t = DEFAULT_REPORT_TOP_N)]
    pub top_n: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Information need shown to the user.
    #[arg(long)]
    pub question: Option<String>,
    /// Appends every applied action to this JSON-lines file.
    #[arg(long)]
    pub audit_log: Option<PathBuf>,
    #[arg(long)]
    pub session_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for corpus.jsonl, embeddings.txt and planted.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub topics: usize,
    #[arg(long, default_value_t = 30)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 300)]
    pub docs: usize,
    #[arg(long, default_value_t = 50)]
    pub doc_len: usize,
    #[arg(long, default_value_t = 5.0)]
    pub concentration: f64,
    #[arg(long, default_value_t = 300)]
    pub embedding_dim: usize,
}

/// Ground truth written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub words: Vec<String>,
    pub blocks: Vec<(usize, usize)>,
    pub assignments: Vec<usize>,
    pub planted_beta: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub coherence_top_n: usize,
    pub diversity_top_n: usize,
    pub top_words: Vec<Vec<String>>,
    pub coherence: CoherenceScores,
    pub diversity: f64,
}

struct Settings {
    config: EtmConfig,
    from_file: bool,
}

fn settings(cli: &Cli) -> Result<Settings> {
    let mut config = EtmConfig::default();
    let from_file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            config
                .apply_kv(&text)
                .with_context(|| format!("config {}", path.display()))?;
            true
        }
        None => false,
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(Settings { config, from_file })
}

fn tokenizer(stopwords: Option<&Path>) -> Result<Tokenizer> {
    Ok(match stopwords {
        Some(p) => Tokenizer::from_stopword_file(p)?,
        None => Tokenizer::english(),
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let s = settings(&cli)?;
    match cli.command {
        Command::Ingest(a) => ingest(&a),
        Command::Train(a) => train_cmd(&a, s.config),
        Command::Eval(a) => eval_cmd(&a),
        Command::Relabel(a) => relabel_cmd(&a, &s),
        Command::Report(a) => report_cmd(&a, &s),
        Command::Serve(a) => serve_cmd(a, &s),
        Command::Synth(a) => synth_cmd(&a, s.config.seed),
    }
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let tok = tokenizer(a.stopwords.as_deref())?;
    let mut docs = load_corpus(&a.corpus)?;
    let bow = prepare(&mut docs, &tok, a.min_df, a.max_df)?;
    bow.save(&a.out)?;
    info!(
        documents = bow.num_docs(),
        vocabulary = bow.vocab_size(),
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

fn train_cmd(a: &TrainArgs, mut config: EtmConfig) -> Result<()> {
    if let Some(v) = a.topics {
        config.topics = v;
    }
    if let Some(v) = a.epochs {
        config.epochs = v;
    }
    if let Some(v) = a.hidden {
        config.hidden = v;
    }
    if let Some(v) = a.lr {
        config.lr = v;
    }
    if let Some(v) = a.batch_size {
        config.batch_size = v;
    }
    config.train_rho |= a.train_rho;

    let bow = BowCorpus::load(&a.bow)?;
    let table = EmbeddingTable::load(&a.embeddings, None)?;
    if table.dim() != config.embedding_dim {
        warn!(
            configured = config.embedding_dim,
            table = table.dim(),
            "embedding_dim follows the vector file"
        );
        config.embedding_dim = table.dim();
    }
    let missing = bow
        .vocab
        .words()
        .iter()
        .filter(|w| !table.contains(w))
        .count();
    if missing > 0 {
        warn!(
            missing,
            "vocabulary words without a vector get a random one"
        );
    }
    let rho =
        table.align_to_vocabulary(&bow.vocab, MissingPolicy::RandomInit { seed: config.seed })?;
    let model = train(&bow, rho, &config)?;
    save_model(&model, &a.out)?;
    info!(
        epochs = config.epochs,
        final_loss = model.loss_curve.last().copied().unwrap_or(f64::NAN),
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

pub fn evaluate(
    model: &EtmModel,
    bow: &BowCorpus,
    coherence_top_n: usize,
    diversity_top_n: usize,
) -> Result<EvalSummary> {
    let stats = CooccurrenceStats::from_corpus(bow)?;
    let lists = |n| -> Vec<Vec<String>> {
        model
            .beta
            .rows()
            .map(|r| top_words(r, &model.vocab, n))
            .collect()
    };
    let top = lists(coherence_top_n);
    Ok(EvalSummary {
        coherence_top_n,
        diversity_top_n,
        coherence: topic_coherence(&top, &stats),
        diversity: topic_diversity(&lists(diversity_top_n)),
        top_words: top,
    })
}

impl EvalSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::from("topic\tnpmi\ttop_words\n");
        for (k, (c, words)) in self
            .coherence
            .per_topic
            .iter()
            .zip(&self.top_words)
            .enumerate()
        {
            s.push_str(&format!("{k}\t{c}\t{}\n", words.join(" ")));
        }
        s.push_str(&format!("mean_npmi\t{}\n", self.coherence.mean));
        s.push_str(&format!("diversity_top_n\t{}\n", self.diversity_top_n));
        s.push_str(&format!("diversity\t{}\n", self.diversity));
        s
    }
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    let model = load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let bow = BowCorpus::load(&a.bow)?;
    let summary = evaluate(&model, &bow, a.coherence_top_n, a.diversity_top_n)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print!("{}", summary.to_text());
    }
    Ok(())
}

/// Loads a checkpoint and its corpus into a fresh session.
pub fn open_session(a: &SessionArgs, s_opts: SessionOptions) -> Result<Session> {
    let model = load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let bow = Arc::new(BowCorpus::load(&a.bow)?);
    let options = SessionOptions {
        tokenizer: tokenizer(a.stopwords.as_deref())?,
        ..s_opts
    };
    Ok(Session::new(&model, bow, options)?)
}

fn session_options(s: &Settings) -> SessionOptions {
    SessionOptions {
        lambda_default: s.from_file.then_some(s.config.lambda_default),
        ..SessionOptions::default()
    }
}

fn replay_log(session: &Session, log: Option<&Path>) -> Result<()> {
    if let Some(path) = log.filter(|p| p.exists()) {
        let actions = read_actions(path)?;
        let n = actions.len();
        session
            .replay(actions)
            .with_context(|| format!("replaying {}", path.display()))?;
        info!(actions = n, "replayed {}", path.display());
    }
    Ok(())
}

fn relabel_cmd(a: &RelabelArgs, s: &Settings) -> Result<()> {
    let session = open_session(&a.session, session_options(s))?;
    replay_log(&session, a.log.as_deref())?;
    let mut req = RelabelRequest::new(
        a.topic,
        a.word.clone(),
        a.lambda.unwrap_or(session.lambda_default()),
        a.mode,
    );
    req.delta = a.delta;
    req.neighbor_count = a.neighbors;
    let record = session.relabel(req.clone())?;
    if let Some(path) = &a.log {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        append_action(&mut file, &Action::Relabel(req))?;
    }
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}

fn report_cmd(a: &ReportArgs, s: &Settings) -> Result<()> {
    let session = open_session(&a.session, session_options(s))?;
    replay_log(&session, a.log.as_deref())?;
    let report = session.report(&a.query, Some(a.top_n))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn serve_cmd(a: ServeArgs, s: &Settings) -> Result<()> {
    let id = a.session_id.clone().unwrap_or_else(|| {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        format!("{nanos:x}")
    });
    let opts = SessionOptions {
        id,
        question: a.question.clone(),
        audit_log: a.audit_log.clone(),
        ..session_options(s)
    };
    let session = Arc::new(open_session(&a.session, opts)?);
    let app = crate::api::router(session.clone());
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.addr)
            .await
            .with_context(|| format!("binding {}", a.addr))?;
        info!(
            session = session.id(),
            topics = session.context().topics(),
            documents = session.corpus().num_docs(),
            "listening on {}",
            listener.local_addr()?
        );
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn synth_cmd(a: &SynthArgs, seed: u64) -> Result<()> {
    if a.embedding_dim == 0 {
        bail!("embedding_dim must be positive");
    }
    let corpus = generate_synthetic_corpus(&SyntheticConfig {
        topics: a.topics,
        vocab_size: a.vocab_size,
        docs: a.docs,
        doc_len: a.doc_len,
        concentration: a.concentration,
        seed,
    })?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_corpus(a.out_dir.join("corpus.jsonl"), &corpus.documents)?;
    synthetic_embeddings(&corpus, a.embedding_dim, seed).save(a.out_dir.join("embeddings.txt"))?;
    let truth = PlantedTruth {
        words: corpus.words.clone(),
        blocks: corpus.blocks.iter().map(|b| (b.start, b.end)).collect(),
        assignments: corpus.assignments.clone(),
        planted_beta: corpus
            .planted_beta
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
    };
    let mut f = std::fs::File::create(a.out_dir.join("planted.json"))?;
    serde_json::to_writer_pretty(&mut f, &truth)?;
    writeln!(f)?;
    let sizes: BTreeMap<usize, usize> =
        corpus
            .assignments
            .iter()
            .fold(BTreeMap::new(), |mut m, &z| {
                *m.entry(z).or_default() += 1;
                m
            });
    info!(documents = a.docs, ?sizes, "wrote {}", a.out_dir.display());
    Ok(())
}
