//! BIO-tagged column-format corpora and plain-text vocabulary handling.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{CoreError, Result};

/// One token of a labeled sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: Option<String>,
    pub label: String,
}

impl Token {
    pub fn new(surface: impl Into<String>, label: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            pos: None,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

/// An ordered list of sentences plus the label inventory observed in them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub tagset: BTreeSet<String>,
    pub source_name: String,
}

impl Corpus {
    pub fn from_sentences(sentences: Vec<Sentence>, source_name: impl Into<String>) -> Self {
        let tagset = sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.label.clone()))
            .collect();
        Corpus {
            sentences,
            tagset,
            source_name: source_name.into(),
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// Word frequency statistics over a raw token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabStats {
    pub counts: HashMap<String, u64>,
    pub total_tokens: u64,
    pub type_count: usize,
}

/// A BIO well-formedness violation: an `I-X` token that does not continue
/// a `B-X`/`I-X` run of the same class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BioViolation {
    pub sentence: usize,
    pub token: usize,
    pub label: String,
}

fn is_valid_label(label: &str) -> bool {
    if label == "O" {
        return true;
    }
    match label.split_once('-') {
        Some((head, class)) => (head == "B" || head == "I") && !class.is_empty(),
        None => false,
    }
}

/// Parses whitespace-separated column format: one token per line, blank
/// line ends a sentence. When `label_col` is absent every label is `O`.
pub fn parse_conll(
    text: &str,
    token_col: usize,
    label_col: Option<usize>,
    pos_col: Option<usize>,
) -> Result<Corpus> {
    if text.trim().is_empty() {
        return Err(CoreError::EmptyInput("corpus text".into()));
    }
    let max_col = [Some(token_col), label_col, pos_col]
        .into_iter()
        .flatten()
        .max()
        .unwrap();

    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(Sentence {
                    tokens: core::mem::take(&mut current),
                });
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() <= max_col {
            return Err(CoreError::Parse {
                line: idx + 1,
                message: format!("missing column {max_col}"),
            });
        }
        let label = match label_col {
            Some(c) => cols[c].to_string(),
            None => "O".to_string(),
        };
        if !is_valid_label(&label) {
            return Err(CoreError::Parse {
                line: idx + 1,
                message: format!("invalid BIO label `{label}`"),
            });
        }
        current.push(Token {
            surface: cols[token_col].to_string(),
            pos: pos_col.map(|c| cols[c].to_string()),
            label,
        });
    }
    if !current.is_empty() {
        sentences.push(Sentence { tokens: current });
    }
    Ok(Corpus::from_sentences(sentences, "conll"))
}

/// Inverse of [`parse_conll`]: token, optional POS, then label, separated
/// by single spaces, blank line between sentences.
pub fn serialize_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            out.push_str(&token.surface);
            if let Some(pos) = &token.pos {
                out.push(' ');
                out.push_str(pos);
            }
            out.push(' ');
            out.push_str(&token.label);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Sentence-level halving: first ceil(n/2) sentences, then the rest.
pub fn split_dev_half(corpus: &Corpus) -> Result<(Corpus, Corpus)> {
    let n = corpus.sentences.len();
    if n < 2 {
        return Err(CoreError::InvalidArgument(
            "split requires at least 2 sentences".into(),
        ));
    }
    let cut = n.div_ceil(2);
    let first = Corpus::from_sentences(
        corpus.sentences[..cut].to_vec(),
        format!("{}:dev", corpus.source_name),
    );
    let second = Corpus::from_sentences(
        corpus.sentences[cut..].to_vec(),
        format!("{}:test", corpus.source_name),
    );
    Ok((first, second))
}

/// Counts whitespace-delimited tokens, keeps words with count >=
/// `freq_threshold`, then optionally caps to the `max_types` most frequent
/// (ties by lexicographic word order).
pub fn build_vocab(
    raw_text: &str,
    freq_threshold: u64,
    max_types: Option<usize>,
) -> Result<VocabStats> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total: u64 = 0;
    for word in raw_text.split_whitespace() {
        *counts.entry(word.to_string()).or_insert(0) += 1;
        total += 1;
    }
    if total == 0 {
        return Err(CoreError::EmptyInput("token stream".into()));
    }
    counts.retain(|_, &mut c| c >= freq_threshold);
    if let Some(cap) = max_types {
        if counts.len() > cap {
            let mut items: Vec<(String, u64)> = counts.drain().collect();
            items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            items.truncate(cap);
            counts = items.into_iter().collect();
        }
    }
    Ok(VocabStats {
        type_count: counts.len(),
        total_tokens: total,
        counts,
    })
}

/// Reports every `I-X` that does not continue a same-class span; with
/// `repair` such tokens are rewritten to `B-X` (conlleval convention).
pub fn validate_bio(corpus: &Corpus, repair: bool) -> (Corpus, Vec<BioViolation>) {
    let mut out = corpus.clone();
    let mut violations = Vec::new();
    for (si, sentence) in out.sentences.iter_mut().enumerate() {
        let mut prev_class: Option<String> = None;
        for (ti, token) in sentence.tokens.iter_mut().enumerate() {
            let class = token.label.split_once('-').map(|(_, c)| c.to_string());
            if let Some(rest) = token.label.strip_prefix("I-") {
                if prev_class.as_deref() != Some(rest) {
                    violations.push(BioViolation {
                        sentence: si,
                        token: ti,
                        label: token.label.clone(),
                    });
                    if repair {
                        token.label = format!("B-{rest}");
                    }
                }
            }
            prev_class = class;
        }
    }
    if repair {
        out = Corpus::from_sentences(out.sentences, out.source_name);
    }
    (out, violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parse_single_token() {
        let c = parse_conll("محمد B-PER\n\n", 0, Some(1), None).unwrap();
        assert_eq!(c.sentences.len(), 1);
        assert_eq!(c.sentences[0].tokens.len(), 1);
        assert_eq!(c.sentences[0].tokens[0].label, "B-PER");
    }

    #[test]
    fn blank_line_delimits_sentences() {
        let c = parse_conll("a O\nb O\n\nc O\n", 0, Some(1), None).unwrap();
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(c.sentences[0].tokens.len(), 2);
        assert_eq!(c.sentences[1].tokens.len(), 1);
    }

    #[test]
    fn missing_column_reports_line() {
        let err = parse_conll("a\n", 0, Some(1), None).unwrap_err();
        assert_eq!(
            err,
            CoreError::Parse {
                line: 1,
                message: "missing column 1".into()
            }
        );
    }

    #[test]
    fn empty_input_is_error() {
        assert!(parse_conll("  \n\n", 0, None, None).is_err());
    }

    #[test]
    fn labels_default_to_outside() {
        let c = parse_conll("a\nb\n", 0, None, None).unwrap();
        assert!(c.sentences[0].tokens.iter().all(|t| t.label == "O"));
    }

    #[test]
    fn tagset_matches_labels() {
        let c = parse_conll("a B-PER\nb I-PER\nc O\n", 0, Some(1), None).unwrap();
        let expect: BTreeSet<String> =
            ["B-PER", "I-PER", "O"].iter().map(|s| s.to_string()).collect();
        assert_eq!(c.tagset, expect);
    }

    #[test]
    fn conll_round_trip() {
        let text = "a NN B-LOC\nb VB I-LOC\n\nc NN O\n\n";
        let c = parse_conll(text, 0, Some(2), Some(1)).unwrap();
        let back = serialize_conll(&c);
        let c2 = parse_conll(&back, 0, Some(2), Some(1)).unwrap();
        assert_eq!(c.sentences, c2.sentences);
    }

    #[test]
    fn split_halves_sentences() {
        let text = (0..711).map(|i| format!("w{i} O\n\n")).collect::<String>();
        let c = parse_conll(&text, 0, Some(1), None).unwrap();
        let (dev, test) = split_dev_half(&c).unwrap();
        assert_eq!(dev.sentences.len(), 356);
        assert_eq!(test.sentences.len(), 355);

        let mut joined = dev.sentences.clone();
        joined.extend(test.sentences.clone());
        assert_eq!(joined, c.sentences);
    }

    #[test]
    fn split_two_and_one() {
        let c = parse_conll("a O\n\nb O\n", 0, Some(1), None).unwrap();
        let (x, y) = split_dev_half(&c).unwrap();
        assert_eq!((x.sentences.len(), y.sentences.len()), (1, 1));

        let one = parse_conll("a O\n", 0, Some(1), None).unwrap();
        assert!(split_dev_half(&one).is_err());
    }

    #[test]
    fn vocab_threshold_and_totals() {
        let v = build_vocab("a a b", 2, None).unwrap();
        assert_eq!(v.counts.get("a"), Some(&2));
        assert_eq!(v.counts.len(), 1);
        assert_eq!(v.total_tokens, 3);
        assert_eq!(v.type_count, 1);

        let all = build_vocab("a a b c", 0, None).unwrap();
        assert_eq!(all.type_count, 3);
        assert_eq!(
            all.counts.values().sum::<u64>(),
            all.total_tokens
        );
    }

    #[test]
    fn vocab_cap_breaks_ties_lexicographically() {
        let v = build_vocab("b a c a b d", 1, Some(2)).unwrap();
        // a:2 b:2 keep; c and d (count 1) dropped by the cap.
        assert!(v.counts.contains_key("a") && v.counts.contains_key("b"));
        assert_eq!(v.type_count, 2);

        let tie = build_vocab("x y z", 1, Some(2)).unwrap();
        assert!(tie.counts.contains_key("x") && tie.counts.contains_key("y"));
    }

    #[test]
    fn vocab_empty_stream_is_error() {
        assert!(build_vocab("   ", 0, None).is_err());
    }

    #[test]
    fn bio_repair_cases() {
        let mk = |labels: &[&str]| {
            let tokens = labels
                .iter()
                .enumerate()
                .map(|(i, l)| Token::new(format!("w{i}"), *l))
                .collect();
            Corpus::from_sentences(vec![Sentence { tokens }], "t")
        };

        let (fixed, v) = validate_bio(&mk(&["O", "I-PER"]), true);
        assert_eq!(v.len(), 1);
        assert_eq!(fixed.sentences[0].tokens[1].label, "B-PER");

        let (_, v) = validate_bio(&mk(&["B-LOC", "I-LOC"]), false);
        assert!(v.is_empty());

        let (fixed, v) = validate_bio(&mk(&["B-LOC", "I-ORG"]), true);
        assert_eq!(v.len(), 1);
        assert_eq!(fixed.sentences[0].tokens[1].label, "B-ORG");

        let (again, v2) = validate_bio(&fixed, false);
        assert!(v2.is_empty());
        assert_eq!(again, fixed);
    }
}
