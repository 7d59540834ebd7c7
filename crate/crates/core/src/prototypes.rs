//! Distributional prototype features: NPMI-ranked prototype words per
//! entity class, assigned to corpus words by embedding cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::Corpus;
use crate::embeddings::{cosine, EmbeddingTable};
use crate::error::{CoreError, Result};
use crate::math;

/// Class/word association counts and the NPMI derived from them. Classes
/// are full BIO tags (B-LOC and I-LOC count separately).
#[derive(Debug, Clone, PartialEq)]
pub struct NpmiTable {
    pub joint: HashMap<(String, String), u64>,
    pub class_totals: HashMap<String, u64>,
    pub word_totals: HashMap<String, u64>,
    pub total: u64,
    /// Only pairs with nonzero joint count; NPMI is undefined otherwise.
    pub npmi: HashMap<(String, String), f64>,
}

/// Top-m prototype words per class, descending NPMI.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeTable {
    pub m: usize,
    pub prototypes: BTreeMap<String, Vec<(String, f64)>>,
    pub threshold: f64,
}

/// Counts (class, word) co-occurrences over every token of the training
/// corpus and computes `NPMI = PMI / (-ln p(class, word))` with the
/// standard `PMI = ln(p(class, word) / (p(class) p(word)))`.
pub fn compute_npmi(train: &Corpus) -> Result<NpmiTable> {
    let mut joint: HashMap<(String, String), u64> = HashMap::new();
    let mut class_totals: HashMap<String, u64> = HashMap::new();
    let mut word_totals: HashMap<String, u64> = HashMap::new();
    let mut total: u64 = 0;
    for sentence in &train.sentences {
        for token in &sentence.tokens {
            *joint
                .entry((token.label.clone(), token.surface.clone()))
                .or_insert(0) += 1;
            *class_totals.entry(token.label.clone()).or_insert(0) += 1;
            *word_totals.entry(token.surface.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(CoreError::EmptyInput("training corpus".into()));
    }
    let n = total as f64;
    let mut npmi = HashMap::with_capacity(joint.len());
    for ((class, word), &count) in &joint {
        let p_joint = count as f64 / n;
        let p_class = class_totals[class] as f64 / n;
        let p_word = word_totals[word] as f64 / n;
        let pmi = math::ln(p_joint / (p_class * p_word));
        let value = if p_joint >= 1.0 {
            // Degenerate single-pair corpus: perfectly associated.
            1.0
        } else {
            pmi / -math::ln(p_joint)
        };
        npmi.insert((class.clone(), word.clone()), value);
    }
    Ok(NpmiTable {
        joint,
        class_totals,
        word_totals,
        total,
        npmi,
    })
}

/// Top `m` words per class by descending NPMI, lexicographic tie-break.
pub fn select_prototypes(npmi: &NpmiTable, m: usize, threshold: f64) -> Result<PrototypeTable> {
    if m < 1 {
        return Err(CoreError::InvalidArgument("m must be >= 1".into()));
    }
    let mut per_class: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for ((class, word), &value) in &npmi.npmi {
        per_class
            .entry(class.clone())
            .or_default()
            .push((word.clone(), value));
    }
    for list in per_class.values_mut() {
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        list.truncate(m);
    }
    Ok(PrototypeTable {
        m,
        prototypes: per_class,
        threshold,
    })
}

/// Emits `proto=<p>` for every prototype of any class whose embedding
/// cosine similarity with the word strictly exceeds the threshold. Words
/// or prototypes without embeddings are skipped.
pub fn assign_prototypes(
    table: &PrototypeTable,
    embeddings: &EmbeddingTable,
    word: &str,
) -> Vec<String> {
    let Some(vector) = embeddings.lookup(word) else {
        return Vec::new();
    };
    let mut attrs = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for list in table.prototypes.values() {
        for (proto, _) in list {
            if seen.contains(&proto.as_str()) {
                continue;
            }
            seen.push(proto);
            let Some(pvec) = embeddings.lookup(proto) else {
                continue;
            };
            match cosine(vector, pvec) {
                Ok(sim) if sim > table.threshold => attrs.push(format!("proto={proto}")),
                _ => {}
            }
        }
    }
    attrs.sort();
    attrs
}
