//! Experiment configuration: a JSON file with a `profile` field selecting
//! shipped defaults (`paper-aqmar` or `synthetic-demo`); any top-level
//! field given in the file replaces the profile's value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wordrep_core::crf::{FeatureTemplateSet, TrainingConfig};
use wordrep_core::embeddings::EmbeddingFormat;
use wordrep_core::transforms::SparseCodingConfig;

use crate::error::{with_path, CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    /// Column label in ablation output.
    pub name: String,
    pub path: PathBuf,
    pub format: String,
}

impl EmbeddingSource {
    pub fn parsed_format(&self) -> Result<EmbeddingFormat> {
        parse_embedding_format(&self.format)
    }
}

pub fn parse_embedding_format(name: &str) -> Result<EmbeddingFormat> {
    match name {
        "word2vec_text" => Ok(EmbeddingFormat::Word2vecText),
        "glove_text" => Ok(EmbeddingFormat::GloveText),
        other => Err(CliError::usage(format!(
            "unknown embedding format {other:?} (expected word2vec_text or glove_text)"
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureFlags {
    pub window: usize,
    pub baseline: bool,
    pub de: bool,
    pub bi_a: bool,
    pub bi_b: bool,
    pub bi_c: bool,
    pub se: bool,
    pub nnse: bool,
    pub ce: bool,
    pub proto: bool,
    pub bc: bool,
    pub de_scale: f64,
    pub brown_prefix_lengths: Vec<usize>,
    pub ce_compound: bool,
}

impl Default for FeatureFlags {
    fn default() -> Self {
        FeatureFlags {
            window: 1,
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
            de_scale: 1.0,
            brown_prefix_lengths: Vec::new(),
            ce_compound: true,
        }
    }
}

impl FeatureFlags {
    pub fn to_templates(&self) -> FeatureTemplateSet {
        FeatureTemplateSet {
            window: self.window,
            baseline: self.baseline,
            de: self.de,
            bi_a: self.bi_a,
            bi_b: self.bi_b,
            bi_c: self.bi_c,
            se: self.se,
            nnse: self.nnse,
            ce: self.ce,
            proto: self.proto,
            bc: self.bc,
            de_scale: self.de_scale,
            brown_prefix_lengths: self.brown_prefix_lengths.clone(),
            ce_compound: self.ce_compound,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SparseSettings {
    pub delta: f64,
    pub tau: f64,
    pub code_len: usize,
    pub eta: f64,
    pub epochs: usize,
}

impl Default for SparseSettings {
    fn default() -> Self {
        let d = SparseCodingConfig::default();
        SparseSettings {
            delta: d.delta,
            tau: d.tau,
            code_len: d.code_len,
            eta: d.eta,
            epochs: d.epochs,
        }
    }
}

impl SparseSettings {
    pub fn to_core(&self, seed: u64, nonneg: bool) -> SparseCodingConfig {
        SparseCodingConfig {
            delta: self.delta,
            tau: self.tau,
            code_len: self.code_len,
            eta: self.eta,
            epochs: self.epochs,
            seed,
            nonneg,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSettings {
    pub l2_sigma2: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub lbfgs_memory: usize,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        let d = TrainingConfig::default();
        TrainingSettings {
            l2_sigma2: d.l2_sigma2,
            max_iterations: d.max_iterations,
            convergence_tol: d.convergence_tol,
            lbfgs_memory: d.lbfgs_memory,
        }
    }
}

impl TrainingSettings {
    pub fn to_core(&self) -> TrainingConfig {
        TrainingConfig {
            l2_sigma2: self.l2_sigma2,
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            lbfgs_memory: self.lbfgs_memory,
        }
    }
}

/// Optional prebuilt resource files (as written by the brown, kmeans,
/// sparse, binarize, and proto subcommands); anything absent is built
/// from the embeddings and corpus at run time.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ResourcePaths {
    pub brown: Option<PathBuf>,
    pub kmeans: Option<PathBuf>,
    pub sparse: Option<PathBuf>,
    pub nnsparse: Option<PathBuf>,
    pub bin_a: Option<PathBuf>,
    pub bin_b: Option<PathBuf>,
    pub bin_c: Option<PathBuf>,
    pub prototypes: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub profile: String,
    pub train_path: Option<PathBuf>,
    pub dev_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub embeddings: Vec<EmbeddingSource>,
    /// Raw text for Brown induction; the training corpus tokens are used
    /// when absent.
    pub raw_text_path: Option<PathBuf>,
    pub token_column: usize,
    pub label_column: usize,
    pub pos_column: Option<usize>,
    pub features: FeatureFlags,
    pub brown_clusters: usize,
    pub brown_min_count: u64,
    pub kmeans_ks: Vec<usize>,
    pub sparse: SparseSettings,
    pub proto_m: usize,
    pub proto_threshold: f64,
    pub training: TrainingSettings,
    pub threads: usize,
    pub resources: ResourcePaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // Full-scale defaults.
        ExperimentConfig {
            profile: "paper-aqmar".to_string(),
            train_path: None,
            dev_path: None,
            test_path: None,
            embeddings: Vec::new(),
            raw_text_path: None,
            token_column: 0,
            label_column: 1,
            pos_column: None,
            features: FeatureFlags::default(),
            brown_clusters: 500,
            brown_min_count: 1,
            kmeans_ks: vec![100, 200, 300, 400, 500, 1000],
            sparse: SparseSettings::default(),
            proto_m: 60,
            proto_threshold: 0.5,
            training: TrainingSettings::default(),
            threads: 1,
            resources: ResourcePaths::default(),
        }
    }
}

impl ExperimentConfig {
    /// Shipped defaults per profile.
    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "paper-aqmar" => Ok(ExperimentConfig::default()),
            "synthetic-demo" => Ok(ExperimentConfig {
                profile: "synthetic-demo".to_string(),
                brown_clusters: 8,
                kmeans_ks: vec![4, 8],
                sparse: SparseSettings {
                    code_len: 60,
                    ..Default::default()
                },
                proto_m: 10,
                training: TrainingSettings {
                    l2_sigma2: 10.0,
                    max_iterations: 200,
                    ..Default::default()
                },
                ..Default::default()
            }),
            other => Err(CliError::usage(format!(
                "unknown profile {other:?} (expected paper-aqmar or synthetic-demo)"
            ))),
        }
    }

    /// Loads a config file: profile defaults with the file's top-level
    /// fields layered over them.
    pub fn load(path: &Path) -> Result<Self> {
        let text = with_path(std::fs::read_to_string(path), path)?;
        let user: serde_json::Value = with_path(serde_json::from_str(&text), path)?;
        let serde_json::Value::Object(user) = user else {
            return Err(CliError::data(format!(
                "{}: config root must be a JSON object",
                path.display()
            )));
        };
        let profile = match user.get("profile") {
            Some(serde_json::Value::String(p)) => p.clone(),
            Some(_) => {
                return Err(CliError::data(format!(
                    "{}: profile must be a string",
                    path.display()
                )))
            }
            None => "paper-aqmar".to_string(),
        };
        let base = ExperimentConfig::profile(&profile)?;
        let mut merged = match serde_json::to_value(&base)? {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("config serializes to an object"),
        };
        for (key, value) in user {
            merged.insert(key, value);
        }
        let config: ExperimentConfig =
            with_path(serde_json::from_value(serde_json::Value::Object(merged)), path)?;
        if config.threads < 1 {
            return Err(CliError::usage("threads must be >= 1"));
        }
        Ok(config)
    }

    pub fn require_train(&self) -> Result<&Path> {
        self.train_path
            .as_deref()
            .ok_or_else(|| CliError::usage("config is missing train_path"))
    }

    pub fn require_test(&self) -> Result<&Path> {
        self.test_path
            .as_deref()
            .ok_or_else(|| CliError::usage("config is missing test_path"))
    }
}
