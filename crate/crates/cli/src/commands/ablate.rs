//! The ablation driver: trains and scores the 14 feature configurations,
//! one F1 column per configured embedding source.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use wordrep_core::crf::{train, viterbi};
use wordrep_core::eval::score;

use crate::config::{ExperimentConfig, FeatureFlags};
use crate::error::{CliError, Result};
use crate::formats::{read_corpus, write_file};
use crate::resources::{build, extract_corpus, label_list, BuiltResources};

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Directory for ablation.tsv and ablation.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// The ablation rows, in table order: name and the representation
/// families the row adds on top of the baseline.
pub fn ablation_rows() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("Baseline", vec![]),
        ("+ DE", vec!["de"]),
        ("+ SE", vec!["se"]),
        ("+ NNSE", vec!["nnse"]),
        ("+ BI (method A)", vec!["bi_a"]),
        ("+ BI (method B)", vec!["bi_b"]),
        ("+ BI (method C)", vec!["bi_c"]),
        ("+ CE", vec!["ce"]),
        ("+ Proto", vec!["proto"]),
        ("+ CE + Proto", vec!["ce", "proto"]),
        ("+ BC", vec!["bc"]),
        ("+ BC + Proto", vec!["bc", "proto"]),
        ("+ BC + CE", vec!["bc", "ce"]),
        ("+ BC + CE + Proto", vec!["bc", "ce", "proto"]),
    ]
}

fn row_flags(base: &FeatureFlags, families: &[&str]) -> FeatureFlags {
    let mut flags = FeatureFlags {
        baseline: true,
        de: false,
        bi_a: false,
        bi_b: false,
        bi_c: false,
        se: false,
        nnse: false,
        ce: false,
        proto: false,
        bc: false,
        ..base.clone()
    };
    for family in families {
        match *family {
            "de" => flags.de = true,
            "se" => flags.se = true,
            "nnse" => flags.nnse = true,
            "bi_a" => flags.bi_a = true,
            "bi_b" => flags.bi_b = true,
            "bi_c" => flags.bi_c = true,
            "ce" => flags.ce = true,
            "proto" => flags.proto = true,
            "bc" => flags.bc = true,
            other => unreachable!("unknown family {other}"),
        }
    }
    flags
}

fn union_flags(base: &FeatureFlags) -> FeatureFlags {
    FeatureFlags {
        baseline: true,
        de: true,
        bi_a: true,
        bi_b: true,
        bi_c: true,
        se: true,
        nnse: true,
        ce: true,
        proto: true,
        bc: true,
        ..base.clone()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AblationJson {
    pub seed: u64,
    pub partial: bool,
    pub columns: Vec<String>,
    pub rows: Vec<AblationRowJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AblationRowJson {
    pub row: String,
    pub f1: BTreeMap<String, f64>,
}

fn render_tsv(columns: &[String], rows: &[AblationRowJson], note: Option<&str>) -> String {
    let mut out = String::from("Row");
    for c in columns {
        out.push_str(&format!("\t{c}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.row);
        for c in columns {
            out.push_str(&format!("\t{:.2}", row.f1[c]));
        }
        out.push('\n');
    }
    if let Some(note) = note {
        out.push_str(&format!("# partial: {note}\n"));
    }
    out
}

fn write_outputs(
    args: &AblateArgs,
    columns: &[String],
    rows: &[AblationRowJson],
    error: Option<&CliError>,
) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", args.out_dir.display())))?;
    let note = error.map(|e| e.to_string());
    write_file(
        &args.out_dir.join("ablation.tsv"),
        &render_tsv(columns, rows, note.as_deref()),
    )?;
    let json = AblationJson {
        seed: args.seed,
        partial: error.is_some(),
        columns: columns.to_vec(),
        rows: rows
            .iter()
            .map(|r| AblationRowJson {
                row: r.row.clone(),
                f1: r.f1.clone(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    write_file(&args.out_dir.join("ablation.json"), &text)
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    if args.threads < 1 {
        return Err(CliError::usage("threads must be >= 1"));
    }
    let config = ExperimentConfig::load(&args.config)?;
    if config.embeddings.is_empty() {
        return Err(CliError::usage(
            "ablation requires at least one embeddings entry in the config",
        ));
    }
    let train_corpus = read_corpus(config.require_train()?, &config)?;
    let test_corpus = read_corpus(config.require_test()?, &config)?;
    let labels = label_list(&train_corpus);

    // All resources built up front, once per embedding column.
    let union = union_flags(&config.features);
    let mut columns: Vec<(String, BuiltResources)> = Vec::new();
    for source in &config.embeddings {
        let built = build(&config, &union, Some(source), args.seed, &train_corpus)?;
        columns.push((source.name.clone(), built));
    }
    let column_names: Vec<String> = columns.iter().map(|(n, _)| n.clone()).collect();

    let mut rows: Vec<AblationRowJson> = Vec::new();
    for (name, families) in ablation_rows() {
        let flags = row_flags(&config.features, &families);
        let templates = flags.to_templates();
        let mut f1 = BTreeMap::new();
        for (column, resources) in &columns {
            let result = (|| -> Result<f64> {
                let data = extract_corpus(&train_corpus, &templates, resources)?;
                let outcome = train(&data, &labels, &config.training.to_core())?;
                let mut predictions = Vec::with_capacity(test_corpus.sentences.len());
                for sentence in &test_corpus.sentences {
                    let attributed = wordrep_core::crf::extract_features(
                        sentence,
                        &templates,
                        &resources.as_refs(),
                    )?;
                    predictions.push(viterbi(&outcome.model, &attributed));
                }
                Ok(score(&test_corpus, &predictions)?.overall.f1)
            })();
            match result {
                Ok(value) => {
                    f1.insert(column.clone(), value);
                }
                Err(err) => {
                    let err = match err {
                        CliError::Usage(m) => CliError::Usage(format!("row {name:?}: {m}")),
                        CliError::Data(m) => CliError::Data(format!("row {name:?}: {m}")),
                        CliError::Numerical(m) => {
                            CliError::Numerical(format!("row {name:?}: {m}"))
                        }
                    };
                    write_outputs(args, &column_names, &rows, Some(&err))?;
                    return Err(err);
                }
            }
        }
        let shown: Vec<String> = column_names
            .iter()
            .map(|c| format!("{c}={:.2}", f1[c]))
            .collect();
        println!("ablate: {name}: {}", shown.join(" "));
        rows.push(AblationRowJson {
            row: name.to_string(),
            f1,
        });
    }
    write_outputs(args, &column_names, &rows, None)?;
    println!(
        "ablate: seed {} | wrote {} rows to {}",
        args.seed,
        rows.len(),
        args.out_dir.display()
    );
    Ok(())
}
