//! Model representation, Viterbi decoding, and the log-likelihood /
//! gradient computation via forward-backward in log space.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::crf::TrainingConfig;
use crate::error::{CoreError, Result};
use crate::math::{self, log_sum_exp};

/// One token's materialized attributes and its gold label.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedToken {
    pub attrs: Vec<(String, f64)>,
    pub gold: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributedSentence {
    pub tokens: Vec<AttributedToken>,
}

/// Trained first-order chain model: per-(attribute, label) state weights
/// and per-label-pair transition weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    pub labels: Vec<String>,
    /// attribute -> one weight per label.
    pub state_weights: HashMap<String, Vec<f64>>,
    /// Row-major `[from * num_labels + to]`.
    pub transition_weights: Vec<f64>,
    pub config: TrainingConfig,
}

impl CrfModel {
    pub fn zeroed(labels: Vec<String>, config: TrainingConfig) -> Self {
        let num = labels.len();
        CrfModel {
            labels,
            state_weights: HashMap::new(),
            transition_weights: vec![0.0; num * num],
            config,
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition_weights[from * self.labels.len() + to]
    }

    /// Per-token, per-label linear state scores.
    fn state_scores(&self, sentence: &AttributedSentence) -> Vec<Vec<f64>> {
        let num = self.labels.len();
        sentence
            .tokens
            .iter()
            .map(|token| {
                let mut scores = vec![0.0f64; num];
                for (attr, value) in &token.attrs {
                    if let Some(weights) = self.state_weights.get(attr) {
                        for (s, &w) in scores.iter_mut().zip(weights) {
                            *s += w * value;
                        }
                    }
                }
                scores
            })
            .collect()
    }
}

/// Highest-scoring label sequence; ties prefer the lower label index.
pub fn viterbi(model: &CrfModel, sentence: &AttributedSentence) -> Vec<String> {
    let num = model.labels.len();
    let n = sentence.tokens.len();
    if n == 0 || num == 0 {
        return Vec::new();
    }
    let scores = model.state_scores(sentence);
    let mut delta = scores[0].clone();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(n);
    for t in 1..n {
        let mut next = vec![f64::NEG_INFINITY; num];
        let mut ptr = vec![0usize; num];
        for y in 0..num {
            let mut best = delta[0] + model.transition(0, y);
            let mut arg = 0;
            for (prev, &d) in delta.iter().enumerate().skip(1) {
                let cand = d + model.transition(prev, y);
                if cand > best {
                    best = cand;
                    arg = prev;
                }
            }
            next[y] = best + scores[t][y];
            ptr[y] = arg;
        }
        back.push(ptr);
        delta = next;
    }
    let mut last = 0;
    for (y, &d) in delta.iter().enumerate().skip(1) {
        if d > delta[last] {
            last = y;
        }
    }
    let mut path = vec![last; n];
    for t in (1..n).rev() {
        path[t - 1] = back[t - 1][path[t]];
    }
    path.into_iter()
        .map(|y| model.labels[y].clone())
        .collect()
}

/// log of the sum over all label sequences of exp(score).
pub fn log_partition(model: &CrfModel, sentence: &AttributedSentence) -> f64 {
    let num = model.labels.len();
    let n = sentence.tokens.len();
    if n == 0 || num == 0 {
        return 0.0;
    }
    let scores = model.state_scores(sentence);
    let mut alpha = scores[0].clone();
    for t in 1..n {
        let mut next = vec![0.0f64; num];
        let mut buffer = vec![0.0f64; num];
        for (y, slot) in next.iter_mut().enumerate() {
            for (prev, b) in buffer.iter_mut().enumerate() {
                *b = alpha[prev] + model.transition(prev, y);
            }
            *slot = log_sum_exp(&buffer) + scores[t][y];
        }
        alpha = next;
    }
    log_sum_exp(&alpha)
}

/// Linear score of one explicit label sequence. Unknown labels are an
/// error rather than a silent remap.
pub fn sequence_score(
    model: &CrfModel,
    sentence: &AttributedSentence,
    labels: &[&str],
) -> Result<f64> {
    if labels.len() != sentence.tokens.len() {
        return Err(CoreError::DimensionMismatch(
            "label sequence length != sentence length".into(),
        ));
    }
    let ids: Vec<usize> = labels
        .iter()
        .map(|l| {
            model
                .label_index(l)
                .ok_or_else(|| CoreError::InvalidArgument(format!("unknown label `{l}`")))
        })
        .collect::<Result<_>>()?;
    let scores = model.state_scores(sentence);
    let mut total = 0.0;
    for (t, &y) in ids.iter().enumerate() {
        total += scores[t][y];
        if t > 0 {
            total += model.transition(ids[t - 1], y);
        }
    }
    Ok(total)
}

/// Gradient of the regularized conditional log-likelihood, mirroring the
/// model's weight layout. Attributes seen only in the data appear with
/// zero weight but a live gradient entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub state: HashMap<String, Vec<f64>>,
    pub transition: Vec<f64>,
}

/// Internal interned form used by the trainer: attributes and labels as
/// dense indices.
pub(crate) struct IndexedData {
    pub attrs: Vec<String>,
    pub labels: Vec<String>,
    pub sentences: Vec<Vec<(Vec<(usize, f64)>, usize)>>,
}

impl IndexedData {
    pub(crate) fn build(data: &[AttributedSentence], labels: &[String]) -> Result<Self> {
        let mut attr_ids: HashMap<&str, usize> = HashMap::new();
        let mut attrs: Vec<String> = Vec::new();
        let mut sentences = Vec::with_capacity(data.len());
        for sentence in data {
            let mut tokens = Vec::with_capacity(sentence.tokens.len());
            for token in &sentence.tokens {
                let gold = labels
                    .iter()
                    .position(|l| *l == token.gold)
                    .ok_or_else(|| {
                        CoreError::InvalidArgument(format!(
                            "gold label `{}` not in label set",
                            token.gold
                        ))
                    })?;
                let ids: Vec<(usize, f64)> = token
                    .attrs
                    .iter()
                    .map(|(attr, value)| {
                        let id = *attr_ids.entry(attr.as_str()).or_insert_with(|| {
                            attrs.push(attr.clone());
                            attrs.len() - 1
                        });
                        (id, *value)
                    })
                    .collect();
                tokens.push((ids, gold));
            }
            sentences.push(tokens);
        }
        Ok(IndexedData {
            attrs,
            labels: labels.to_vec(),
            sentences,
        })
    }

    pub(crate) fn param_count(&self) -> usize {
        let num = self.labels.len();
        self.attrs.len() * num + num * num
    }
}

/// Regularized log-likelihood and gradient over interned data.
/// Parameter layout: state weights `[attr * L + label]`, then the L x L
/// transition block.
pub(crate) fn ll_grad_indexed(
    params: &[f64],
    data: &IndexedData,
    sigma2: f64,
) -> Result<(f64, Vec<f64>)> {
    let num = data.labels.len();
    let trans_base = data.attrs.len() * num;
    let mut ll = 0.0;
    let mut grad = vec![0.0f64; params.len()];

    for (si, sentence) in data.sentences.iter().enumerate() {
        let n = sentence.len();
        if n == 0 {
            continue;
        }
        // State scores.
        let scores: Vec<Vec<f64>> = sentence
            .iter()
            .map(|(attrs, _)| {
                let mut s = vec![0.0f64; num];
                for &(a, v) in attrs {
                    let base = a * num;
                    for (y, slot) in s.iter_mut().enumerate() {
                        *slot += params[base + y] * v;
                    }
                }
                s
            })
            .collect();

        // Forward.
        let mut alpha = vec![vec![0.0f64; num]; n];
        alpha[0].copy_from_slice(&scores[0]);
        let mut buffer = vec![0.0f64; num];
        for t in 1..n {
            for y in 0..num {
                for (prev, b) in buffer.iter_mut().enumerate() {
                    *b = alpha[t - 1][prev] + params[trans_base + prev * num + y];
                }
                alpha[t][y] = log_sum_exp(&buffer) + scores[t][y];
            }
        }
        let log_z = log_sum_exp(&alpha[n - 1]);
        if !log_z.is_finite() {
            return Err(CoreError::Numerical(format!(
                "non-finite partition function at sentence {si}"
            )));
        }

        // Backward.
        let mut beta = vec![vec![0.0f64; num]; n];
        for t in (0..n - 1).rev() {
            for y in 0..num {
                for (nxt, b) in buffer.iter_mut().enumerate() {
                    *b = params[trans_base + y * num + nxt] + scores[t + 1][nxt] + beta[t + 1][nxt];
                }
                beta[t][y] = log_sum_exp(&buffer);
            }
        }

        // Gold score.
        let mut gold_score = 0.0;
        for (t, (_, gold)) in sentence.iter().enumerate() {
            gold_score += scores[t][*gold];
            if t > 0 {
                gold_score += params[trans_base + sentence[t - 1].1 * num + gold];
            }
        }
        ll += gold_score - log_z;

        // Empirical minus expected feature counts.
        for (t, (attrs, gold)) in sentence.iter().enumerate() {
            for &(a, v) in attrs {
                grad[a * num + gold] += v;
            }
            for y in 0..num {
                let p = math::exp(alpha[t][y] + beta[t][y] - log_z);
                for &(a, v) in attrs {
                    grad[a * num + y] -= p * v;
                }
            }
            if t > 0 {
                grad[trans_base + sentence[t - 1].1 * num + gold] += 1.0;
                for prev in 0..num {
                    for y in 0..num {
                        let p = math::exp(
                            alpha[t - 1][prev]
                                + params[trans_base + prev * num + y]
                                + scores[t][y]
                                + beta[t][y]
                                - log_z,
                        );
                        grad[trans_base + prev * num + y] -= p;
                    }
                }
            }
        }
    }

    // Gaussian prior.
    let mut norm2 = 0.0;
    for (g, &w) in grad.iter_mut().zip(params) {
        norm2 += w * w;
        *g -= w / sigma2;
    }
    ll -= norm2 / (2.0 * sigma2);
    if !ll.is_finite() {
        return Err(CoreError::Numerical("non-finite log-likelihood".into()));
    }
    Ok((ll, grad))
}

/// Regularized conditional log-likelihood of `data` under `model`, with
/// its exact gradient in the model's own layout.
pub fn log_likelihood_and_gradient(
    model: &CrfModel,
    data: &[AttributedSentence],
    config: &TrainingConfig,
) -> Result<(f64, Gradient)> {
    let indexed = IndexedData::build(data, &model.labels)?;
    let num = model.labels.len();
    let mut params = vec![0.0f64; indexed.param_count()];
    let mut extra_attrs: Vec<&String> = Vec::new();
    for (id, attr) in indexed.attrs.iter().enumerate() {
        match model.state_weights.get(attr) {
            Some(weights) => params[id * num..(id + 1) * num].copy_from_slice(weights),
            None => extra_attrs.push(attr),
        }
    }
    let trans_base = indexed.attrs.len() * num;
    params[trans_base..].copy_from_slice(&model.transition_weights);
    // Weights the model carries but the data never references only feel
    // the prior; fold them in afterwards.
    let (mut ll, grad_vec) = ll_grad_indexed(&params, &indexed, config.l2_sigma2)?;
    let mut gradient = Gradient {
        state: HashMap::new(),
        transition: grad_vec[trans_base..].to_vec(),
    };
    for (id, attr) in indexed.attrs.iter().enumerate() {
        gradient
            .state
            .insert(attr.clone(), grad_vec[id * num..(id + 1) * num].to_vec());
    }
    for (attr, weights) in &model.state_weights {
        if !gradient.state.contains_key(attr) {
            let norm2: f64 = weights.iter().map(|w| w * w).sum();
            ll -= norm2 / (2.0 * config.l2_sigma2);
            gradient.state.insert(
                attr.clone(),
                weights.iter().map(|w| -w / config.l2_sigma2).collect(),
            );
        }
    }
    Ok((ll, gradient))
}
