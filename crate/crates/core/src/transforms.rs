//! Recodings of dense embeddings: sign/mean/median binarization into
//! ternary symbols, and sparse overcomplete coding via dictionary
//! learning with an l1-thresholded dual-averaging code update.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::embeddings::EmbeddingTable;
use crate::error::{CoreError, Result};
use crate::math;
use crate::rng::Rng;

/// Output alphabet of the binarizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TernarySymbol {
    /// "+U"
    Pos,
    /// "0"
    Zero,
    /// "-B"
    Neg,
}

impl TernarySymbol {
    pub fn as_str(&self) -> &'static str {
        match self {
            TernarySymbol::Pos => "+U",
            TernarySymbol::Zero => "0",
            TernarySymbol::Neg => "-B",
        }
    }
}

/// Which thresholding rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinarizeMethod {
    /// Sign only: positive entries become [`TernarySymbol::Pos`].
    A,
    /// Mean of the positive / negative entries of the vector.
    B,
    /// Median of the positive / negative entries of the vector.
    C,
}

impl BinarizeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinarizeMethod::A => "A",
            BinarizeMethod::B => "B",
            BinarizeMethod::C => "C",
        }
    }
}

/// Per-vector thresholds; a side is absent when the vector has no entries
/// of that sign.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarizationThresholds {
    pub mean_pos: Option<f64>,
    pub mean_neg: Option<f64>,
    pub median_pos: Option<f64>,
    pub median_neg: Option<f64>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Computes the per-vector mean and median thresholds over the positive
/// and negative entries.
pub fn thresholds(x: &[f64]) -> BinarizationThresholds {
    let mut pos: Vec<f64> = x.iter().copied().filter(|&v| v > 0.0).collect();
    let mut neg: Vec<f64> = x.iter().copied().filter(|&v| v < 0.0).collect();
    pos.sort_unstable_by(f64::total_cmp);
    neg.sort_unstable_by(f64::total_cmp);
    BinarizationThresholds {
        mean_pos: (!pos.is_empty()).then(|| pos.iter().sum::<f64>() / pos.len() as f64),
        mean_neg: (!neg.is_empty()).then(|| neg.iter().sum::<f64>() / neg.len() as f64),
        median_pos: (!pos.is_empty()).then(|| median(&pos)),
        median_neg: (!neg.is_empty()).then(|| median(&neg)),
    }
}

/// Discretizes one embedding vector. Method A uses only {Pos, Zero};
/// methods B and C compare against the vector's own mean/median
/// thresholds, so no Pos (Neg) is emitted when the vector has no positive
/// (negative) entries.
pub fn binarize(x: &[f64], method: BinarizeMethod) -> Result<Vec<TernarySymbol>> {
    if x.is_empty() {
        return Err(CoreError::EmptyInput("binarize input vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Numerical("non-finite entry in binarize".into()));
    }
    let th = thresholds(x);
    let (upper, lower) = match method {
        BinarizeMethod::A => (None, None),
        BinarizeMethod::B => (th.mean_pos, th.mean_neg),
        BinarizeMethod::C => (th.median_pos, th.median_neg),
    };
    Ok(x.iter()
        .map(|&v| match method {
            BinarizeMethod::A => {
                if v > 0.0 {
                    TernarySymbol::Pos
                } else {
                    TernarySymbol::Zero
                }
            }
            _ => {
                if upper.is_some_and(|u| v >= u) {
                    TernarySymbol::Pos
                } else if lower.is_some_and(|l| v <= l) {
                    TernarySymbol::Neg
                } else {
                    TernarySymbol::Zero
                }
            }
        })
        .collect())
}

/// Hyperparameters of the sparse coder.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodingConfig {
    /// l1 coefficient.
    pub delta: f64,
    /// l2 coefficient on the dictionary.
    pub tau: f64,
    /// Overcomplete code length.
    pub code_len: usize,
    /// Base learning rate.
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Non-negative variant: negative code updates are zeroed.
    pub nonneg: bool,
}

impl Default for SparseCodingConfig {
    fn default() -> Self {
        SparseCodingConfig {
            delta: 0.5,
            tau: 1e-5,
            code_len: 500,
            eta: 0.05,
            epochs: 20,
            seed: 0,
            nonneg: false,
        }
    }
}

impl SparseCodingConfig {
    fn validate(&self) -> Result<()> {
        if self.code_len < 1 {
            return Err(CoreError::InvalidArgument("code length must be >= 1".into()));
        }
        if self.delta < 0.0 || self.tau < 0.0 || self.eta <= 0.0 || self.epochs == 0 {
            return Err(CoreError::InvalidArgument(
                "sparse coding config requires delta >= 0, tau >= 0, eta > 0, epochs >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Learned dictionary and codes. `objective_trace[0]` is the objective at
/// initialization; one further entry is appended after each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodeResult {
    /// L rows of length K.
    pub dictionary: Vec<Vec<f64>>,
    pub codes: HashMap<String, Vec<f64>>,
    pub objective_trace: Vec<f64>,
}

impl SparseCodeResult {
    /// Fraction of exactly-zero code entries.
    pub fn zero_fraction(&self) -> f64 {
        let total: usize = self.codes.values().map(|c| c.len()).sum();
        if total == 0 {
            return 0.0;
        }
        let zeros: usize = self
            .codes
            .values()
            .map(|c| c.iter().filter(|&&v| v == 0.0).count())
            .sum();
        zeros as f64 / total as f64
    }
}

/// Reconstruction-plus-regularization objective
/// `sum_i ||x_i - D a_i||^2 + delta * sum_i ||a_i||_1 + tau * ||D||_F^2`.
pub fn sparse_objective(
    result: &SparseCodeResult,
    table: &EmbeddingTable,
    config: &SparseCodingConfig,
) -> Result<f64> {
    let dict = &result.dictionary;
    if dict.len() != table.dim {
        return Err(CoreError::DimensionMismatch(format!(
            "dictionary has {} rows, table dim is {}",
            dict.len(),
            table.dim
        )));
    }
    let k = config.code_len;
    if dict.iter().any(|row| row.len() != k) {
        return Err(CoreError::DimensionMismatch(
            "dictionary row length != code length".into(),
        ));
    }
    let mut total = 0.0;
    for (word, x) in &table.vectors {
        let code = result.codes.get(word).ok_or_else(|| {
            CoreError::DimensionMismatch(format!("no code for word `{word}`"))
        })?;
        if code.len() != k {
            return Err(CoreError::DimensionMismatch(format!(
                "code for `{word}` has length {}",
                code.len()
            )));
        }
        for (l, &xl) in x.iter().enumerate() {
            let recon: f64 = dict[l].iter().zip(code).map(|(&d, &a)| d * a).sum();
            let r = xl - recon;
            total += r * r;
        }
        total += config.delta * code.iter().map(|&a| math::abs(a)).sum::<f64>();
    }
    total += config.tau
        * dict
            .iter()
            .flat_map(|row| row.iter())
            .map(|&d| d * d)
            .sum::<f64>();
    Ok(total)
}

struct WordState {
    code: Vec<f64>,
    avg_grad: Vec<f64>,
    grad_sq_sum: Vec<f64>,
    steps: u64,
}

/// Learns a sparse overcomplete recoding of the table.
///
/// Alternates per epoch: every code is refit with the thresholded
/// dual-averaging rule (average gradient `g_bar`, accumulated squared
/// gradient `G`, step size `eta * t / sqrt(G)`, coordinates with
/// `|g_bar| <= delta` forced to zero, negative updates also zeroed in
/// non-negative mode), then the dictionary takes one AdaGrad step on the
/// l2-regularized reconstruction error. Deterministic for a given seed.
pub fn sparse_code(table: &EmbeddingTable, config: &SparseCodingConfig) -> Result<SparseCodeResult> {
    config.validate()?;
    if table.is_empty() {
        return Err(CoreError::EmptyInput("embedding table".into()));
    }
    let dim = table.dim;
    let k = config.code_len;
    let words: Vec<String> = table
        .sorted_words()
        .into_iter()
        .map(|w| w.to_string())
        .collect();

    let mut rng = Rng::derive(config.seed, "transforms.sparse_code");
    let bound = 1.0 / math::sqrt(k as f64);
    let mut dict: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..k).map(|_| rng.uniform(-bound, bound)).collect())
        .collect();
    let mut dict_grad_sq = vec![vec![0.0f64; k]; dim];

    let mut states: HashMap<&str, WordState> = words
        .iter()
        .map(|w| {
            (
                w.as_str(),
                WordState {
                    code: vec![0.0; k],
                    avg_grad: vec![0.0; k],
                    grad_sq_sum: vec![0.0; k],
                    steps: 0,
                },
            )
        })
        .collect();

    let initial = objective_of(&dict, &states, &words, table, config);
    let mut trace = vec![initial];

    for epoch in 1..=config.epochs {
        // Code pass with the dictionary frozen.
        for word in &words {
            let x = &table.vectors[word.as_str()];
            let state = states.get_mut(word.as_str()).unwrap();
            state.steps += 1;
            let t = state.steps as f64;

            // residual = D a - x
            let mut residual = vec![0.0f64; dim];
            for (l, r) in residual.iter_mut().enumerate() {
                let recon: f64 = dict[l].iter().zip(&state.code).map(|(&d, &a)| d * a).sum();
                *r = recon - x[l];
            }
            for j in 0..k {
                let g: f64 = 2.0 * (0..dim).map(|l| dict[l][j] * residual[l]).sum::<f64>();
                state.avg_grad[j] = ((t - 1.0) * state.avg_grad[j] + g) / t;
                state.grad_sq_sum[j] += g * g;
                let g_bar = state.avg_grad[j];
                state.code[j] = if math::abs(g_bar) <= config.delta || state.grad_sq_sum[j] == 0.0 {
                    0.0
                } else {
                    let step = config.eta * t / math::sqrt(state.grad_sq_sum[j]);
                    let gamma = -sign(g_bar) * step * (math::abs(g_bar) - config.delta);
                    if config.nonneg && gamma < 0.0 {
                        0.0
                    } else {
                        gamma
                    }
                };
            }
        }

        // Dictionary AdaGrad step on sum_i ||D a_i - x_i||^2 + tau ||D||^2.
        let mut dict_grad = vec![vec![0.0f64; k]; dim];
        for word in &words {
            let x = &table.vectors[word.as_str()];
            let code = &states[word.as_str()].code;
            for l in 0..dim {
                let recon: f64 = dict[l].iter().zip(code).map(|(&d, &a)| d * a).sum();
                let r = 2.0 * (recon - x[l]);
                if r != 0.0 {
                    for (j, &a) in code.iter().enumerate() {
                        if a != 0.0 {
                            dict_grad[l][j] += r * a;
                        }
                    }
                }
            }
        }
        for l in 0..dim {
            for j in 0..k {
                let g = dict_grad[l][j] + 2.0 * config.tau * dict[l][j];
                dict_grad_sq[l][j] += g * g;
                if dict_grad_sq[l][j] > 0.0 {
                    dict[l][j] -= config.eta * g / math::sqrt(dict_grad_sq[l][j]);
                }
            }
        }

        let objective = objective_of(&dict, &states, &words, table, config);
        if !objective.is_finite() {
            return Err(CoreError::Numerical(format!(
                "sparse coding diverged at epoch {epoch}"
            )));
        }
        trace.push(objective);
    }

    let codes: HashMap<String, Vec<f64>> = words
        .iter()
        .map(|w| (w.clone(), states[w.as_str()].code.clone()))
        .collect();
    Ok(SparseCodeResult {
        dictionary: dict,
        codes,
        objective_trace: trace,
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn objective_of(
    dict: &[Vec<f64>],
    states: &HashMap<&str, WordState>,
    words: &[String],
    table: &EmbeddingTable,
    config: &SparseCodingConfig,
) -> f64 {
    let mut total = 0.0;
    for word in words {
        let x = &table.vectors[word.as_str()];
        let code = &states[word.as_str()].code;
        for (l, &xl) in x.iter().enumerate() {
            let recon: f64 = dict[l].iter().zip(code).map(|(&d, &a)| d * a).sum();
            let r = xl - recon;
            total += r * r;
        }
        total += config.delta * code.iter().map(|&a| math::abs(a)).sum::<f64>();
    }
    total
        + config.tau
            * dict
                .iter()
                .flat_map(|row| row.iter())
                .map(|&d| d * d)
                .sum::<f64>()
}

/// Ternary recoding of a whole table, for feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarizedTable {
    pub method: BinarizeMethod,
    pub symbols: HashMap<String, Vec<TernarySymbol>>,
}

pub fn binarize_table(table: &EmbeddingTable, method: BinarizeMethod) -> Result<BinarizedTable> {
    let mut symbols = HashMap::with_capacity(table.len());
    for (word, x) in &table.vectors {
        symbols.insert(word.clone(), binarize(x, method)?);
    }
    Ok(BinarizedTable { method, symbols })
}

/// Sparse codes in index/value form, for feature extraction and the
/// sparse dump file format.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVectors {
    pub code_len: usize,
    pub codes: HashMap<String, Vec<(usize, f64)>>,
}

impl SparseVectors {
    pub fn from_result(result: &SparseCodeResult, code_len: usize) -> Self {
        let codes = result
            .codes
            .iter()
            .map(|(w, code)| {
                let nz: Vec<(usize, f64)> = code
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect();
                (w.clone(), nz)
            })
            .collect();
        SparseVectors { code_len, codes }
    }
}

/// Attribute strings for one binarized vector: `bin<method>[<offset>]<j>=<sym>`;
/// zero symbols emit nothing.
pub fn ternary_attributes(
    symbols: &[TernarySymbol],
    method: BinarizeMethod,
    offset: i32,
) -> Vec<String> {
    symbols
        .iter()
        .enumerate()
        .filter(|(_, s)| **s != TernarySymbol::Zero)
        .map(|(j, s)| format!("bin{}[{}]{}={}", method.as_str(), offset, j, s.as_str()))
        .collect()
}
