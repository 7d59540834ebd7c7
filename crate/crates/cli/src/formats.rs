//! Readers and writers for the on-disk resource formats. All writers emit
//! deterministically sorted output so identical inputs and seeds give
//! byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wordrep_core::clusters::{BrownModel, KMeansFit, KMeansModel};
use wordrep_core::corpus::{parse_conll, Corpus};
use wordrep_core::crf::{AttributedSentence, AttributedToken, CrfModel};
use wordrep_core::eval::EvalReport;
use wordrep_core::prototypes::PrototypeTable;
use wordrep_core::transforms::{BinarizeMethod, BinarizedTable, SparseVectors, TernarySymbol};

use crate::config::{ExperimentConfig, FeatureFlags, TrainingSettings};
use crate::error::{with_path, CliError, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    with_path(std::fs::read_to_string(path), path)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    with_path(std::fs::write(path, contents), path)
}

pub fn read_corpus(path: &Path, config: &ExperimentConfig) -> Result<Corpus> {
    let text = read_to_string(path)?;
    with_path(
        parse_conll(
            &text,
            config.token_column,
            Some(config.label_column),
            config.pos_column,
        )
        .map_err(CliError::from),
        path,
    )
}

// --- Brown clusters: "<path>\t<word>\t<count>" ---

pub fn brown_to_string(model: &BrownModel) -> String {
    let mut rows: Vec<(&String, &String, u64)> = model
        .paths
        .iter()
        .map(|(word, path)| (path, word, model.counts.get(word).copied().unwrap_or(0)))
        .collect();
    rows.sort();
    let mut out = String::new();
    for (path, word, count) in rows {
        out.push_str(&format!("{path}\t{word}\t{count}\n"));
    }
    out
}

pub fn brown_from_string(text: &str) -> Result<BrownModel> {
    let mut paths = hashbrown::HashMap::new();
    let mut counts = hashbrown::HashMap::new();
    let mut distinct = std::collections::BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(path), Some(word), Some(count)) = (cols.next(), cols.next(), cols.next())
        else {
            return Err(CliError::data(format!(
                "line {}: expected <path>\\t<word>\\t<count>",
                i + 1
            )));
        };
        let count: u64 = count
            .parse()
            .map_err(|_| CliError::data(format!("line {}: bad count {count:?}", i + 1)))?;
        distinct.insert(path.to_string());
        paths.insert(word.to_string(), path.to_string());
        counts.insert(word.to_string(), count);
    }
    if paths.is_empty() {
        return Err(CliError::data("empty Brown cluster file"));
    }
    Ok(BrownModel {
        paths,
        counts,
        num_clusters: distinct.len(),
        merges: Vec::new(),
    })
}

// --- k-means: header "k-list\t<k1>\t…", then "<word>\t<c_k1>\t…" ---

pub fn kmeans_to_string(model: &KMeansModel) -> String {
    let ks: Vec<usize> = model.per_k.keys().copied().collect();
    let mut words: std::collections::BTreeSet<&String> = std::collections::BTreeSet::new();
    for fit in model.per_k.values() {
        words.extend(fit.assignment.keys());
    }
    let mut out = String::from("k-list");
    for k in &ks {
        out.push_str(&format!("\t{k}"));
    }
    out.push('\n');
    for word in words {
        out.push_str(word);
        for k in &ks {
            let c = model.per_k[k].assignment.get(word).copied();
            match c {
                Some(c) => out.push_str(&format!("\t{c}")),
                None => out.push_str("\t-"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn kmeans_from_string(text: &str) -> Result<KMeansModel> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CliError::data("empty k-means file"));
    };
    let mut cols = header.split('\t');
    if cols.next() != Some("k-list") {
        return Err(CliError::data("k-means file must start with a k-list header"));
    }
    let ks: Vec<usize> = cols
        .map(|c| {
            c.parse()
                .map_err(|_| CliError::data(format!("bad k value {c:?} in header")))
        })
        .collect::<Result<_>>()?;
    let mut per_k: BTreeMap<usize, KMeansFit> = ks
        .iter()
        .map(|&k| {
            (
                k,
                KMeansFit {
                    centroids: Vec::new(),
                    assignment: hashbrown::HashMap::new(),
                    sse: 0.0,
                    sse_trace: Vec::new(),
                },
            )
        })
        .collect();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let Some(word) = cols.next() else { continue };
        for (&k, cell) in ks.iter().zip(cols) {
            if cell == "-" {
                continue;
            }
            let c: usize = cell
                .parse()
                .map_err(|_| CliError::data(format!("line {}: bad cluster id {cell:?}", i + 1)))?;
            per_k
                .get_mut(&k)
                .unwrap()
                .assignment
                .insert(word.to_string(), c);
        }
    }
    Ok(KMeansModel { per_k })
}

// --- Sparse / binary vector dumps: "<word> <j>:<value> …" ---

pub fn sparse_to_string(vectors: &SparseVectors) -> String {
    let mut words: Vec<&String> = vectors.codes.keys().collect();
    words.sort();
    let mut out = String::new();
    for word in words {
        out.push_str(word);
        let mut entries = vectors.codes[word].clone();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (j, v) in entries {
            out.push_str(&format!(" {j}:{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn sparse_from_string(text: &str) -> Result<SparseVectors> {
    let mut codes = hashbrown::HashMap::new();
    let mut code_len = 0;
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let mut entries = Vec::new();
        for part in parts {
            let Some((j, v)) = part.split_once(':') else {
                return Err(CliError::data(format!(
                    "line {}: expected <j>:<value>, got {part:?}",
                    i + 1
                )));
            };
            let j: usize = j
                .parse()
                .map_err(|_| CliError::data(format!("line {}: bad index {j:?}", i + 1)))?;
            let v: f64 = v
                .parse()
                .map_err(|_| CliError::data(format!("line {}: bad value {v:?}", i + 1)))?;
            code_len = code_len.max(j + 1);
            entries.push((j, v));
        }
        codes.insert(word.to_string(), entries);
    }
    if codes.is_empty() {
        return Err(CliError::data("empty sparse vector file"));
    }
    Ok(SparseVectors { code_len, codes })
}

// Binarized tables use the same dump shape with symbol values; zeros are
// written out so the vector length survives the round trip.

pub fn binarized_to_string(table: &BinarizedTable) -> String {
    let mut words: Vec<&String> = table.symbols.keys().collect();
    words.sort();
    let mut out = String::new();
    for word in words {
        out.push_str(word);
        for (j, s) in table.symbols[word].iter().enumerate() {
            out.push_str(&format!(" {j}:{}", s.as_str()));
        }
        out.push('\n');
    }
    out
}

pub fn binarized_from_string(text: &str, method: BinarizeMethod) -> Result<BinarizedTable> {
    let mut symbols = hashbrown::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let mut row = Vec::new();
        for part in parts {
            let Some((_, v)) = part.split_once(':') else {
                return Err(CliError::data(format!(
                    "line {}: expected <j>:<symbol>, got {part:?}",
                    i + 1
                )));
            };
            row.push(match v {
                "+U" => TernarySymbol::Pos,
                "0" => TernarySymbol::Zero,
                "-B" => TernarySymbol::Neg,
                other => {
                    return Err(CliError::data(format!(
                        "line {}: unknown symbol {other:?}",
                        i + 1
                    )))
                }
            });
        }
        symbols.insert(word.to_string(), row);
    }
    if symbols.is_empty() {
        return Err(CliError::data("empty binarized vector file"));
    }
    Ok(BinarizedTable { method, symbols })
}

// --- Prototypes: "<class>\t<word>\t<npmi>", descending NPMI per class ---

pub fn prototypes_to_string(table: &PrototypeTable) -> String {
    let mut out = String::new();
    for (class, list) in &table.prototypes {
        for (word, npmi) in list {
            out.push_str(&format!("{class}\t{word}\t{npmi}\n"));
        }
    }
    out
}

pub fn prototypes_from_string(text: &str, threshold: f64) -> Result<PrototypeTable> {
    let mut prototypes: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(class), Some(word), Some(npmi)) = (cols.next(), cols.next(), cols.next())
        else {
            return Err(CliError::data(format!(
                "line {}: expected <class>\\t<word>\\t<npmi>",
                i + 1
            )));
        };
        let npmi: f64 = npmi
            .parse()
            .map_err(|_| CliError::data(format!("line {}: bad NPMI {npmi:?}", i + 1)))?;
        prototypes
            .entry(class.to_string())
            .or_default()
            .push((word.to_string(), npmi));
    }
    if prototypes.is_empty() {
        return Err(CliError::data("empty prototype file"));
    }
    let m = prototypes.values().map(Vec::len).max().unwrap_or(0);
    Ok(PrototypeTable {
        m,
        prototypes,
        threshold,
    })
}

// --- CRFsuite-style attribute files: "<label>\t<attr>[:<value>]\t…" ---

fn escape_attr(attr: &str) -> String {
    attr.replace('\\', "\\\\").replace(':', "\\:")
}

fn unescape_attr(attr: &str) -> String {
    let mut out = String::with_capacity(attr.len());
    let mut chars = attr.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Splits on the last unescaped ':' so values survive escaped attribute
/// text.
fn split_attr_value(field: &str) -> (String, f64) {
    let bytes = field.as_bytes();
    let mut split_at = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i] == b':' {
            split_at = Some(i);
        }
        i += 1;
    }
    match split_at {
        Some(pos) => {
            let value = field[pos + 1..].parse().unwrap_or(1.0);
            (unescape_attr(&field[..pos]), value)
        }
        None => (unescape_attr(field), 1.0),
    }
}

pub fn attributes_to_string(sentences: &[AttributedSentence]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        for token in &sentence.tokens {
            out.push_str(&token.gold);
            for (attr, value) in &token.attrs {
                out.push('\t');
                out.push_str(&escape_attr(attr));
                if *value != 1.0 {
                    out.push_str(&format!(":{value}"));
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn attributes_from_string(text: &str) -> Result<Vec<AttributedSentence>> {
    let mut sentences = Vec::new();
    let mut current: Vec<AttributedToken> = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(AttributedSentence {
                    tokens: std::mem::take(&mut current),
                });
            }
            continue;
        }
        let mut fields = line.split('\t');
        let gold = fields.next().unwrap_or_default().to_string();
        let attrs = fields.map(split_attr_value).collect();
        current.push(AttributedToken { attrs, gold });
    }
    if !current.is_empty() {
        sentences.push(AttributedSentence { tokens: current });
    }
    Ok(sentences)
}

// --- Model file: versioned JSON ---

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub seed: u64,
    pub labels: Vec<String>,
    pub state_weights: BTreeMap<String, Vec<f64>>,
    pub transition_weights: Vec<f64>,
    pub training: TrainingSettings,
    pub features: FeatureFlags,
    /// Experiment config at train time; tag reloads resources from it.
    pub experiment: ExperimentConfig,
}

impl ModelFile {
    pub fn from_model(
        model: &CrfModel,
        seed: u64,
        features: &FeatureFlags,
        experiment: &ExperimentConfig,
    ) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            labels: model.labels.clone(),
            state_weights: model
                .state_weights
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            transition_weights: model.transition_weights.clone(),
            training: experiment.training,
            features: features.clone(),
            experiment: experiment.clone(),
        }
    }

    pub fn to_model(&self) -> CrfModel {
        CrfModel {
            labels: self.labels.clone(),
            state_weights: self
                .state_weights
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            transition_weights: self.transition_weights.clone(),
            config: self.training.to_core(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let file: ModelFile = with_path(serde_json::from_str(&text), path)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(CliError::data(format!(
                "{}: unsupported model format version {}",
                path.display(),
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_file(path, &text)
    }
}

// --- Evaluation report rendering ---

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportJson {
    pub per_class: BTreeMap<String, ClassJson>,
    pub overall: ScoresJson,
    pub token_accuracy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassJson {
    pub gold: u64,
    pub pred: u64,
    pub correct: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoresJson {
    pub gold: u64,
    pub pred: u64,
    pub correct: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn report_to_json(report: &EvalReport) -> ReportJson {
    ReportJson {
        per_class: report
            .per_class
            .iter()
            .map(|(class, (counts, scores))| {
                (
                    class.clone(),
                    ClassJson {
                        gold: counts.gold,
                        pred: counts.pred,
                        correct: counts.correct,
                        precision: scores.precision,
                        recall: scores.recall,
                        f1: scores.f1,
                    },
                )
            })
            .collect(),
        overall: ScoresJson {
            gold: report.overall_counts.gold,
            pred: report.overall_counts.pred,
            correct: report.overall_counts.correct,
            precision: report.overall.precision,
            recall: report.overall.recall,
            f1: report.overall.f1,
        },
        token_accuracy: report.token_accuracy,
    }
}

pub fn report_to_table(report: &EvalReport) -> String {
    let width = report
        .per_class
        .keys()
        .map(|c| c.chars().count())
        .chain(["overall".len()])
        .max()
        .unwrap_or(7)
        .max(5);
    let mut out = format!(
        "{:<width$}  {:>6}  {:>6}  {:>7}  {:>9}  {:>6}  {:>6}\n",
        "class", "gold", "pred", "correct", "precision", "recall", "F1"
    );
    for (class, (counts, scores)) in &report.per_class {
        out.push_str(&format!(
            "{:<width$}  {:>6}  {:>6}  {:>7}  {:>9.2}  {:>6.2}  {:>6.2}\n",
            class, counts.gold, counts.pred, counts.correct,
            scores.precision, scores.recall, scores.f1
        ));
    }
    let c = &report.overall_counts;
    let s = &report.overall;
    out.push_str(&format!(
        "{:<width$}  {:>6}  {:>6}  {:>7}  {:>9.2}  {:>6.2}  {:>6.2}\n",
        "overall", c.gold, c.pred, c.correct, s.precision, s.recall, s.f1
    ));
    out.push_str(&format!(
        "token accuracy: {:.2}\n",
        report.token_accuracy
    ));
    out
}
