//! Phrase-level precision/recall/F1 with conlleval span semantics: an
//! entity is a maximal B-X (I-X)* span and counts as correct only on an
//! exact class and boundary match.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::Corpus;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrfScores {
    /// Percentages with full precision; render with 2 decimals.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub gold: u64,
    pub pred: u64,
    pub correct: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_class: BTreeMap<String, (ClassCounts, PrfScores)>,
    pub overall_counts: ClassCounts,
    pub overall: PrfScores,
    pub token_accuracy: f64,
}

fn prf(counts: &ClassCounts) -> PrfScores {
    let precision = if counts.pred > 0 {
        100.0 * counts.correct as f64 / counts.pred as f64
    } else {
        0.0
    };
    let recall = if counts.gold > 0 {
        100.0 * counts.correct as f64 / counts.gold as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    PrfScores {
        precision,
        recall,
        f1,
    }
}

/// (class, start, end-exclusive) spans after conlleval-style repair: an
/// `I-X` following `O`, a different class, or sentence start opens a new
/// entity.
pub fn extract_entities(labels: &[&str]) -> Vec<(String, usize, usize)> {
    let mut spans = Vec::new();
    let mut open: Option<(String, usize)> = None;
    for (i, label) in labels.iter().enumerate() {
        let (is_begin, class) = match label.split_once('-') {
            Some((head, class)) => (head == "B", Some(class)),
            None => (false, None),
        };
        let continues = !is_begin
            && class.is_some()
            && open.as_ref().is_some_and(|(c, _)| Some(c.as_str()) == class);
        if !continues {
            if let Some((c, start)) = open.take() {
                spans.push((c, start, i));
            }
            if let Some(class) = class {
                open = Some((class.to_string(), i));
            }
        }
    }
    if let Some((c, start)) = open {
        spans.push((c, start, labels.len()));
    }
    spans
}

/// Scores predicted label sequences against the gold corpus. `pred` must
/// have exactly the same sentence and token shape.
pub fn score(gold: &Corpus, pred: &[Vec<String>]) -> Result<EvalReport> {
    if pred.len() != gold.sentences.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "gold has {} sentences, pred has {}",
            gold.sentences.len(),
            pred.len()
        )));
    }
    let mut per_class: BTreeMap<String, ClassCounts> = BTreeMap::new();
    let mut correct_tokens: u64 = 0;
    let mut total_tokens: u64 = 0;
    for (i, (sentence, pred_labels)) in gold.sentences.iter().zip(pred).enumerate() {
        if pred_labels.len() != sentence.tokens.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "sentence {i}: gold has {} tokens, pred has {}",
                sentence.tokens.len(),
                pred_labels.len()
            )));
        }
        let gold_labels: Vec<&str> = sentence.tokens.iter().map(|t| t.label.as_str()).collect();
        let pred_refs: Vec<&str> = pred_labels.iter().map(|l| l.as_str()).collect();
        for (g, p) in gold_labels.iter().zip(&pred_refs) {
            total_tokens += 1;
            if g == p {
                correct_tokens += 1;
            }
        }
        let gold_spans = extract_entities(&gold_labels);
        let pred_spans = extract_entities(&pred_refs);
        for span in &gold_spans {
            per_class.entry(span.0.clone()).or_default().gold += 1;
        }
        for span in &pred_spans {
            let counts = per_class.entry(span.0.clone()).or_default();
            counts.pred += 1;
            if gold_spans.contains(span) {
                counts.correct += 1;
            }
        }
    }

    let mut overall_counts = ClassCounts::default();
    for counts in per_class.values() {
        overall_counts.gold += counts.gold;
        overall_counts.pred += counts.pred;
        overall_counts.correct += counts.correct;
    }
    Ok(EvalReport {
        overall: prf(&overall_counts),
        overall_counts,
        per_class: per_class
            .into_iter()
            .map(|(c, counts)| {
                let scores = prf(&counts);
                (c, (counts, scores))
            })
            .collect(),
        token_accuracy: if total_tokens > 0 {
            100.0 * correct_tokens as f64 / total_tokens as f64
        } else {
            0.0
        },
    })
}
