//! Resource-building subcommands: brown, kmeans, sparse, binarize, proto.

use std::path::PathBuf;

use clap::Args;
use wordrep_core::clusters::{brown_induce, kmeans_multi};
use wordrep_core::corpus::parse_conll;
use wordrep_core::prototypes::{compute_npmi, select_prototypes};
use wordrep_core::transforms::{
    binarize_table, sparse_code, BinarizeMethod, SparseCodingConfig, SparseVectors,
};

use crate::config::{parse_embedding_format, EmbeddingSource};
use crate::error::{CliError, Result};
use crate::formats::{
    binarized_to_string, brown_to_string, kmeans_to_string, prototypes_to_string,
    read_to_string, sparse_to_string, write_file,
};
use crate::resources::load_embedding_table;

#[derive(Args, Debug)]
pub struct BrownArgs {
    /// Raw whitespace-tokenized text.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn cmd_brown(args: &BrownArgs) -> Result<()> {
    let text = read_to_string(&args.input)?;
    let model = brown_induce(&text, args.clusters, args.min_count)?;
    write_file(&args.output, &brown_to_string(&model))?;
    let lengths: Vec<usize> = model.paths.values().map(String::len).collect();
    println!(
        "brown: {} clusters over {} types, path lengths {}..{}",
        model.num_clusters,
        model.paths.len(),
        lengths.iter().min().unwrap_or(&0),
        lengths.iter().max().unwrap_or(&0)
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct EmbeddingInput {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// word2vec_text or glove_text.
    #[arg(long, default_value = "word2vec_text")]
    pub format: String,
}

impl EmbeddingInput {
    fn load(&self) -> Result<wordrep_core::embeddings::EmbeddingTable> {
        parse_embedding_format(&self.format)?;
        load_embedding_table(&EmbeddingSource {
            name: String::new(),
            path: self.embeddings.clone(),
            format: self.format.clone(),
        })
    }
}

#[derive(Args, Debug)]
pub struct KmeansArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    /// Granularities, e.g. --ks 100,200,500.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn cmd_kmeans(args: &KmeansArgs) -> Result<()> {
    let table = args.input.load()?;
    let model = kmeans_multi(&table, &args.ks, args.seed)?;
    write_file(&args.output, &kmeans_to_string(&model))?;
    for (k, fit) in &model.per_k {
        println!("kmeans: k={k} sse={:.6} ({} words)", fit.sse, fit.assignment.len());
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SparseArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tau: f64,
    /// Overcomplete code length.
    #[arg(long = "code-len", alias = "K", default_value_t = 500)]
    pub code_len: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long)]
    pub seed: u64,
    /// Non-negative variant (NNSE).
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn cmd_sparse(args: &SparseArgs) -> Result<()> {
    let table = args.input.load()?;
    let config = SparseCodingConfig {
        delta: args.delta,
        tau: args.tau,
        code_len: args.code_len,
        eta: args.eta,
        epochs: args.epochs,
        seed: args.seed,
        nonneg: args.nonneg,
    };
    let result = sparse_code(&table, &config)?;
    let vectors = SparseVectors::from_result(&result, args.code_len);
    write_file(&args.output, &sparse_to_string(&vectors))?;
    println!(
        "sparse: objective {:.6} -> {:.6}, zero fraction {:.4}",
        result.objective_trace.first().unwrap_or(&0.0),
        result.objective_trace.last().unwrap_or(&0.0),
        result.zero_fraction()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct BinarizeArgs {
    #[command(flatten)]
    pub input: EmbeddingInput,
    /// A (sign), B (mean), or C (median).
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn parse_method(name: &str) -> Result<BinarizeMethod> {
    match name {
        "A" => Ok(BinarizeMethod::A),
        "B" => Ok(BinarizeMethod::B),
        "C" => Ok(BinarizeMethod::C),
        other => Err(CliError::usage(format!(
            "unknown binarize method {other:?} (expected A, B, or C)"
        ))),
    }
}

pub fn cmd_binarize(args: &BinarizeArgs) -> Result<()> {
    let method = parse_method(&args.method)?;
    let table = args.input.load()?;
    let binarized = binarize_table(&table, method)?;
    write_file(&args.output, &binarized_to_string(&binarized))?;
    let (mut pos, mut zero, mut neg) = (0u64, 0u64, 0u64);
    for row in binarized.symbols.values() {
        for s in row {
            match s {
                wordrep_core::transforms::TernarySymbol::Pos => pos += 1,
                wordrep_core::transforms::TernarySymbol::Zero => zero += 1,
                wordrep_core::transforms::TernarySymbol::Neg => neg += 1,
            }
        }
    }
    println!("binarize: method {} symbols +U={pos} 0={zero} -B={neg}", args.method);
    Ok(())
}

#[derive(Args, Debug)]
pub struct ProtoArgs {
    /// BIO-tagged training corpus (CoNLL columns).
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub m: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub token_col: usize,
    #[arg(long, default_value_t = 1)]
    pub label_col: usize,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn cmd_proto(args: &ProtoArgs) -> Result<()> {
    let text = read_to_string(&args.train)?;
    let corpus = parse_conll(&text, args.token_col, Some(args.label_col), None)
        .map_err(|e| CliError::data(format!("{}: {e}", args.train.display())))?;
    let npmi = compute_npmi(&corpus)?;
    let table = select_prototypes(&npmi, args.m, args.threshold)?;
    write_file(&args.output, &prototypes_to_string(&table))?;
    for (class, list) in &table.prototypes {
        println!("proto: {class}: {} prototypes", list.len());
    }
    Ok(())
}
