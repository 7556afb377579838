use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "guided-decode",
    version,
    about = "Build instruction datasets, run knowledge-guided decoding and score the outputs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a knowledge base file (or the built-in fixture) and write it
    /// back in normalized form.
    BuildKb(BuildKbArgs),
    /// Sample instances, render instructions and write train/dev/test files.
    BuildDataset(BuildDatasetArgs),
    /// Run guided decoding over a dataset file.
    Generate(GenerateArgs),
    /// Score generations against their instances.
    Evaluate(EvaluateArgs),
    /// Print one or more saved evaluation reports.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KbKindArg {
    Hierarchy,
    Property,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Deterministic table model over the fixture vocabulary.
    Fixture,
    /// Table rules from --model-file over --vocab.
    Table,
    /// N-gram model fit on the --model-file corpus.
    Ngram,
    /// Remote model behind the bridge protocol at --bridge-url.
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    None,
    Verifier,
    Topk,
    Textual,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// TOML file supplying any flag of this subcommand by its long name.
    /// Flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KbPaths {
    /// Hierarchy knowledge base file; the built-in fixture when omitted.
    #[arg(long)]
    pub hierarchy_kb: Option<PathBuf>,
    /// Property knowledge base file; the built-in fixture when omitted.
    #[arg(long)]
    pub property_kb: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelSource {
    /// Rule file (table) or training corpus, one sentence per line (ngram).
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Vocabulary file for table and ngram models. For ngram it defaults to
    /// the corpus words.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub ngram_order: usize,
    #[arg(long, default_value = "0.1")]
    pub ngram_smoothing: f64,
    /// Bridge server URL. GUIDED_DECODE_BRIDGE_URL overrides it.
    #[arg(long, default_value = "http://127.0.0.1:8765")]
    pub bridge_url: String,
    #[arg(long, default_value_t = 50256)]
    pub bridge_eos: u32,
    #[arg(long, default_value_t = 1024)]
    pub bridge_max_context: usize,
    /// Ask the bridge for sparse top-N logits instead of dense vectors.
    #[arg(long)]
    pub bridge_top_n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildKbArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_enum, default_value = "hierarchy")]
    pub kind: KbKindArg,
    /// Source file in the knowledge base format; the fixture when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BuildDatasetArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_enum, default_value = "hierarchy")]
    pub kind: KbKindArg,
    #[command(flatten)]
    pub kbs: KbPaths,
    /// Template file; the built-in 35 templates when omitted.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Train instances [default: 3000 hierarchy, 1500 property].
    #[arg(long)]
    pub train: Option<usize>,
    /// Dev instances [default: 500].
    #[arg(long)]
    pub dev: Option<usize>,
    /// Test instances [default: 500 hierarchy, 198 property].
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub train_templates: usize,
    #[arg(long, default_value_t = 3)]
    pub dev_templates: usize,
    /// Templates rendered per sampled instance.
    #[arg(long, default_value_t = 1)]
    pub fan_out: usize,
    /// Pick constraints from a model continuation instead of uniformly.
    #[arg(long, value_enum)]
    pub scorer: Option<ModelKind>,
    #[command(flatten)]
    pub model: ModelSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for train.jsonl, dev.jsonl and test.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Dataset file (JSON lines of instances).
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "fixture")]
    pub model: ModelKind,
    #[command(flatten)]
    pub source: ModelSource,
    #[command(flatten)]
    pub kbs: KbPaths,
    #[arg(long, value_enum, default_value = "textual")]
    pub strategy: StrategyArg,
    /// Topic boost.
    #[arg(long, default_value = "5.0")]
    pub alpha: f64,
    /// Constraint penalty.
    #[arg(long, default_value = "100.0")]
    pub beta: f64,
    #[arg(long, default_value_t = 20)]
    pub k_topic: usize,
    #[arg(long, default_value_t = 40)]
    pub k_constraint: usize,
    /// Tokens sampled per entity when generating textual examples.
    #[arg(long, default_value_t = 200)]
    pub trie_budget: usize,
    #[arg(long, default_value_t = 64)]
    pub max_tokens: usize,
    /// Greedy look-ahead steps for the verifier.
    #[arg(long, default_value_t = 8)]
    pub lookahead: usize,
    #[arg(long, default_value = "0.9")]
    pub top_p: f64,
    #[arg(long, default_value = "1.0")]
    pub temperature: f64,
    /// Independent sampled continuations pooled for textual examples.
    #[arg(long, default_value_t = 4)]
    pub beams: usize,
    /// Use every example token at every step instead of following tries.
    #[arg(long)]
    pub no_trie: bool,
    /// Let the verifier boost verified topic spans too.
    #[arg(long)]
    pub verifier_topic: bool,
    /// Textual examples to reuse, keyed by instance id.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Write the textual examples used by this run.
    #[arg(long)]
    pub cache_out: Option<PathBuf>,
    /// Only the first N instances.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output file (JSON lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Generation file from `generate`.
    #[arg(long)]
    pub generations: PathBuf,
    #[command(flatten)]
    pub kbs: KbPaths,
    /// Perplexity scorer; perplexity is reported as n/a without one.
    #[arg(long, value_enum)]
    pub scorer: Option<ModelKind>,
    #[command(flatten)]
    pub model: ModelSource,
    /// Score only the first sentence of each generation.
    #[arg(long)]
    pub first_sentence: bool,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Report JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-instance results (JSON lines).
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Category breakdown CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Report JSON files written by `evaluate`.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Category breakdown CSV of the first report.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
