//! `wordrep`: sequence labeling with word-representation features.
//!
//! Subcommands build representation resources (brown, kmeans, sparse,
//! binarize, proto), run the model pipeline (train, tag, eval), generate
//! seeded synthetic data (synth), and drive the full feature-ablation
//! matrix (ablate).
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure.

mod commands;
mod config;
mod error;
mod formats;
mod resources;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::ablate::{cmd_ablate, AblateArgs};
use commands::build::{
    cmd_binarize, cmd_brown, cmd_kmeans, cmd_proto, cmd_sparse, BinarizeArgs, BrownArgs,
    KmeansArgs, ProtoArgs, SparseArgs,
};
use commands::run::{
    cmd_eval, cmd_synth, cmd_tag, cmd_train, EvalArgs, SynthArgs, TagArgs, TrainArgs,
};
use error::Result;

#[derive(Parser, Debug)]
#[command(name = "wordrep", version, about = "Sequence labeling with word-representation features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Induce Brown clusters from raw text.
    Brown(BrownArgs),
    /// Cluster embeddings with k-means at several granularities.
    Kmeans(KmeansArgs),
    /// Learn sparse overcomplete codes for embeddings.
    Sparse(SparseArgs),
    /// Discretize embeddings into ternary symbols.
    Binarize(BinarizeArgs),
    /// Select distributional prototypes by NPMI.
    Proto(ProtoArgs),
    /// Train a CRF tagger from an experiment config.
    Train(TrainArgs),
    /// Tag a corpus with a trained model.
    Tag(TagArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Run the full feature-ablation matrix.
    Ablate(AblateArgs),
    /// Generate a seeded synthetic corpus + embeddings bundle.
    Synth(SynthArgs),
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Brown(args) => cmd_brown(args),
        Command::Kmeans(args) => cmd_kmeans(args),
        Command::Sparse(args) => cmd_sparse(args),
        Command::Binarize(args) => cmd_binarize(args),
        Command::Proto(args) => cmd_proto(args),
        Command::Train(args) => cmd_train(args),
        Command::Tag(args) => cmd_tag(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
