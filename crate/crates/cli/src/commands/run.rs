//! Model-level subcommands: train, tag, eval, synth.

use std::path::PathBuf;

use clap::Args;
use wordrep_core::corpus::{parse_conll, Corpus};
use wordrep_core::crf::{train, viterbi};
use wordrep_core::eval::score;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::formats::{
    attributes_from_string, attributes_to_string, read_corpus, read_to_string, report_to_json,
    report_to_table, write_file, ModelFile,
};
use crate::resources::{build, extract_corpus, label_list};

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; all per-module randomness derives from it.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Output model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Optional CRFsuite-style attribute dump of the training features.
    #[arg(long)]
    pub dump_attributes: Option<PathBuf>,
    /// Train directly from a CRFsuite-style attribute file, skipping
    /// feature extraction. The resulting model can only tag attribute
    /// files prepared the same way, so tag resources still come from the
    /// config.
    #[arg(long)]
    pub attributes: Option<PathBuf>,
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    if args.threads < 1 {
        return Err(CliError::usage("threads must be >= 1"));
    }
    let config = ExperimentConfig::load(&args.config)?;
    let flags = config.features.clone();
    let (data, labels, sentence_count) = match &args.attributes {
        Some(path) => {
            let data = attributes_from_string(&read_to_string(path)?)?;
            if data.is_empty() {
                return Err(CliError::data(format!(
                    "{}: no attribute rows",
                    path.display()
                )));
            }
            let labels: Vec<String> = data
                .iter()
                .flat_map(|s| s.tokens.iter().map(|t| t.gold.clone()))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let count = data.len();
            (data, labels, count)
        }
        None => {
            let train_corpus = read_corpus(config.require_train()?, &config)?;
            let resources = build(
                &config,
                &flags,
                config.embeddings.first(),
                args.seed,
                &train_corpus,
            )?;
            let templates = flags.to_templates();
            let data = extract_corpus(&train_corpus, &templates, &resources)?;
            let labels = label_list(&train_corpus);
            let count = train_corpus.sentences.len();
            (data, labels, count)
        }
    };
    if let Some(path) = &args.dump_attributes {
        write_file(path, &attributes_to_string(&data))?;
    }
    let outcome = train(&data, &labels, &config.training.to_core())?;
    ModelFile::from_model(&outcome.model, args.seed, &flags, &config).save(&args.model)?;
    println!(
        "train: seed {} | {} sentences, {} labels, {} attributes | objective {:.6} after {} accepted steps",
        args.seed,
        sentence_count,
        labels.len(),
        outcome.model.state_weights.len(),
        outcome.objective_trace.last().unwrap_or(&0.0),
        outcome.objective_trace.len()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct TagArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CoNLL input to tag (labels optional under the model's columns).
    #[arg(long)]
    pub input: PathBuf,
    /// Output: "<token>\t<predicted>" per line, blank line per sentence.
    #[arg(long)]
    pub output: PathBuf,
}

/// Parses the input leniently: uses the model's column layout when the
/// label column exists, otherwise treats each line's first column as the
/// token with no gold labels.
fn read_tag_input(path: &std::path::Path, config: &ExperimentConfig) -> Result<Corpus> {
    let text = read_to_string(path)?;
    match parse_conll(
        &text,
        config.token_column,
        Some(config.label_column),
        config.pos_column,
    ) {
        Ok(corpus) => Ok(corpus),
        Err(_) => parse_conll(&text, 0, None, None)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display()))),
    }
}

pub fn cmd_tag(args: &TagArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    let model = file.to_model();
    let config = &file.experiment;
    let input = read_tag_input(&args.input, config)?;
    // Prototype and Brown resources are rebuilt from the training-time
    // inputs recorded in the embedded config.
    let train_corpus = if file.features.proto || (file.features.bc && config.raw_text_path.is_none())
    {
        read_corpus(config.require_train()?, config)?
    } else {
        Corpus::from_sentences(Vec::new(), "unused")
    };
    let resources = build(config, &file.features, config.embeddings.first(), file.seed, &train_corpus)?;
    let templates = file.features.to_templates();
    let mut out = String::new();
    for sentence in &input.sentences {
        let attributed = wordrep_core::crf::extract_features(sentence, &templates, &resources.as_refs())?;
        let predicted = viterbi(&model, &attributed);
        for (token, label) in sentence.tokens.iter().zip(&predicted) {
            out.push_str(&format!("{}\t{label}\n", token.surface));
        }
        out.push('\n');
    }
    write_file(&args.output, &out)?;
    println!(
        "tag: {} sentences, {} tokens",
        input.sentences.len(),
        input.token_count()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Gold CoNLL file.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predicted file: "<token>\t<label>" rows as written by tag.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub token_col: usize,
    #[arg(long, default_value_t = 1)]
    pub label_col: usize,
    /// Optional JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let gold_text = read_to_string(&args.gold)?;
    let gold = parse_conll(&gold_text, args.token_col, Some(args.label_col), None)
        .map_err(|e| CliError::data(format!("{}: {e}", args.gold.display())))?;
    let pred_text = read_to_string(&args.pred)?;
    let pred_corpus = parse_conll(&pred_text, 0, Some(1), None)
        .map_err(|e| CliError::data(format!("{}: {e}", args.pred.display())))?;
    let pred: Vec<Vec<String>> = pred_corpus
        .sentences
        .iter()
        .map(|s| s.tokens.iter().map(|t| t.label.clone()).collect())
        .collect();
    let report = score(&gold, &pred)?;
    print!("{}", report_to_table(&report));
    if let Some(path) = &args.json {
        let mut text = serde_json::to_string_pretty(&report_to_json(&report))?;
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 120)]
    pub sentences: usize,
    #[arg(long, default_value_t = 60)]
    pub test_sentences: usize,
    /// Directory for train.conll, test.conll, embeddings.vec, raw.txt,
    /// config.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    crate::synth::write_bundle(&args.out_dir, args.seed, args.sentences, args.test_sentences)?;
    println!(
        "synth: seed {} | {} train + {} test sentences in {}",
        args.seed,
        args.sentences,
        args.test_sentences,
        args.out_dir.display()
    );
    Ok(())
}
