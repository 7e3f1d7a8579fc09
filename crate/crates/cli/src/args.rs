use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hash2vec",
    version,
    about = "Word embeddings from hashed co-occurrence counts",
    args_override_self = true
)]
pub struct Cli {
    /// key=value file of default flag values; flags on the command line win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize and clean a corpus, writing one sentence per line
    Preprocess {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        prep: PrepArgs,
        /// Seed for sentence sampling
        #[arg(long, env = "HASH2VEC_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Train an embedding table from a text corpus in one streaming pass
    Train {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Embedding dimension
        #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        prep: PrepArgs,
        /// Parallel workers; the output is identical for any value
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
        shards: u64,
        /// Accumulate in single precision
        #[arg(long)]
        f32: bool,
    },
    /// Add tables trained with identical parameters
    Merge {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert a table to another format
    Export {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Word2vec)]
        format: ExportFormat,
    },
    /// Nearest neighbors by cosine similarity, as JSON lines
    #[command(alias = "nearest")]
    Query {
        table: PathBuf,
        #[arg(required = true, num_args = 1..)]
        words: Vec<String>,
        #[arg(long, default_value_t = 10)]
        topk: usize,
    },
    /// "x is to y like z is to ?" by similarity to x + y - z, as JSON lines
    Analogy {
        table: PathBuf,
        x: String,
        y: String,
        z: String,
        #[arg(long, default_value_t = 10)]
        topk: usize,
        /// Rank by raw dot product with the unnormalized combination
        #[arg(long)]
        raw_dot: bool,
    },
    /// Spearman correlation of table cosines against a similarity dataset
    Evaluate { table: PathBuf, dataset: PathBuf },
    /// Evaluate tables of several dimensions against the exact co-occurrence reference
    Sweep {
        input: PathBuf,
        dataset: PathBuf,
        /// Dimensions to train, ascending
        #[arg(long = "n", required = true, num_args = 1.., value_parser = clap::value_parser!(u64).range(1..))]
        dims: Vec<u64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        prep: PrepArgs,
        /// CSV destination; standard output when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare hashed and exact inner products over sampled word pairs
    OracleCompare {
        input: PathBuf,
        #[arg(long = "n", required = true, num_args = 1.., value_parser = clap::value_parser!(u64).range(1..))]
        dims: Vec<u64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        prep: PrepArgs,
        /// Number of word pairs to sample
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Largest vocabulary the exact matrix may hold
        #[arg(long, default_value_t = hash2vec::oracle::DEFAULT_VOCAB_CAP)]
        vocab_cap: usize,
        /// Also write per-pair rows for the first dimension here
        #[arg(long, value_name = "PATH")]
        pairs_csv: Option<PathBuf>,
        /// CSV destination; standard output when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate the synthetic topical corpus used by the test suite
    Synth {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        tokens: usize,
        #[arg(long, env = "HASH2VEC_SEED", default_value_t = 0)]
        seed: u64,
        /// Also write a matching word-similarity dataset
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 350)]
        dataset_pairs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    Constant,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    /// word2vec text format: a "count dimension" line, then one row per word
    Word2vec,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Context window size
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, value_enum, default_value_t = WeightKind::Gaussian)]
    pub weight: WeightKind,
    /// Gaussian width; defaults to k/2
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, env = "HASH2VEC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Sign hash seed; derived from --seed when omitted
    #[arg(long)]
    pub sign_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PrepArgs {
    /// File of tokens to drop, one per line
    #[arg(long, value_name = "PATH")]
    pub stoplist: Option<PathBuf>,
    /// Keep only the rarest tokens that together hold at most this share of all tokens
    #[arg(long, value_name = "P")]
    pub percentile: Option<f64>,
    /// Join frequent adjacent pairs into single tokens
    #[arg(long)]
    pub phrases: bool,
    #[arg(long, default_value_t = 1e-4, value_name = "T")]
    pub phrase_threshold: f64,
    #[arg(long, default_value_t = hash2vec::corpus::PhraseConfig::DEFAULT_DISCOUNT, value_name = "D")]
    pub phrase_discount: f64,
    #[arg(long, default_value_t = 2)]
    pub phrase_passes: usize,
    /// Keep each sentence with this probability
    #[arg(long, value_name = "P")]
    pub sample_prob: Option<f64>,
}
