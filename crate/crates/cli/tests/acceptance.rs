//! Acceptance suite: one pass/fail line per criterion, run with
//! `cargo test --test acceptance -- --nocapture`.
//!
//! 1. CRF correctness (brute-force Viterbi/partition, finite differences)
//! 2. Trainer sanity (memorization, ascending objective)
//! 3. Transforms (binarization hand examples + covariance, sparse coding)
//! 4. Clustering (k-means optimum, Brown naive-greedy oracle)
//! 5. Prototypes (NPMI identities and assignment rules)
//! 6. Scorer (hand-scored examples, swap symmetry)
//! 7. End-to-end synthetic ablation with the pinned +CE margin
//! 8. Optional full reproduction on user-supplied data (skipped unless
//!    WORDREP_AQMAR_CONFIG points at a prepared config)

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;

use wordrep_core::corpus::{parse_conll, Corpus, Sentence, Token};
use wordrep_core::crf::{
    log_likelihood_and_gradient, log_partition, sequence_score, train, viterbi,
    AttributedSentence, AttributedToken, CrfModel, TrainingConfig,
};
use wordrep_core::embeddings::{cosine, EmbeddingTable};
use wordrep_core::eval::score;
use wordrep_core::prototypes::{assign_prototypes, compute_npmi, PrototypeTable};
use wordrep_core::rng::Rng;
use wordrep_core::transforms::{
    binarize, sparse_code, sparse_objective, BinarizeMethod, SparseCodingConfig, TernarySymbol,
};

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, message: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(message.into())
    }
}

// ---------- shared random-instance helpers ----------

fn labels(k: usize) -> Vec<String> {
    ["A", "B", "C", "D"][..k].iter().map(|s| s.to_string()).collect()
}

fn random_model(rng: &mut Rng, num_labels: usize, num_attrs: usize) -> CrfModel {
    let mut model = CrfModel::zeroed(labels(num_labels), TrainingConfig::default());
    for a in 0..num_attrs {
        let weights = (0..num_labels).map(|_| rng.uniform(-1.5, 1.5)).collect();
        model.state_weights.insert(format!("a{a}"), weights);
    }
    for w in model.transition_weights.iter_mut() {
        *w = rng.uniform(-1.0, 1.0);
    }
    model
}

fn random_sentence(rng: &mut Rng, num_attrs: usize, max_len: usize, num_labels: usize) -> AttributedSentence {
    let len = 1 + rng.below(max_len);
    AttributedSentence {
        tokens: (0..len)
            .map(|_| AttributedToken {
                attrs: (0..1 + rng.below(3))
                    .map(|_| (format!("a{}", rng.below(num_attrs)), rng.uniform(-1.0, 1.0)))
                    .collect(),
                gold: labels(num_labels)[rng.below(num_labels)].clone(),
            })
            .collect(),
    }
}

fn enumerate_sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

fn brute_force(model: &CrfModel, sentence: &AttributedSentence) -> (Vec<String>, f64) {
    let k = model.labels.len();
    let mut best = f64::NEG_INFINITY;
    let mut best_seq = vec![];
    let mut scores = vec![];
    for seq in enumerate_sequences(sentence.tokens.len(), k) {
        let named: Vec<&str> = seq.iter().map(|&y| model.labels[y].as_str()).collect();
        let s = sequence_score(model, sentence, &named).unwrap();
        scores.push(s);
        if s > best {
            best = s;
            best_seq = named.iter().map(|x| x.to_string()).collect();
        }
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    (best_seq, log_z)
}

// ---------- criterion 1: CRF correctness ----------

fn criterion_crf() -> Check {
    let mut rng = Rng::derive(2024, "acceptance.crf");
    for trial in 0..100 {
        let num_labels = 2 + rng.below(3);
        let model = random_model(&mut rng, num_labels, 5);
        let sentence = random_sentence(&mut rng, 5, 6, num_labels);
        let (expect_seq, expect_log_z) = brute_force(&model, &sentence);
        ensure(
            viterbi(&model, &sentence) == expect_seq,
            format!("trial {trial}: Viterbi differs from enumeration argmax"),
        )?;
        let log_z = log_partition(&model, &sentence);
        let rel = (log_z - expect_log_z).abs() / expect_log_z.abs().max(1.0);
        ensure(rel < 1e-8, format!("trial {trial}: log-partition rel err {rel}"))?;
    }

    // Normalization by enumeration.
    let mut rng = Rng::derive(7, "acceptance.norm");
    for trial in 0..20 {
        let num_labels = 2 + rng.below(3);
        let model = random_model(&mut rng, num_labels, 4);
        let sentence = random_sentence(&mut rng, 4, 6, num_labels);
        let log_z = log_partition(&model, &sentence);
        let total: f64 = enumerate_sequences(sentence.tokens.len(), num_labels)
            .into_iter()
            .map(|seq| {
                let named: Vec<&str> = seq.iter().map(|&y| model.labels[y].as_str()).collect();
                (sequence_score(&model, &sentence, &named).unwrap() - log_z).exp()
            })
            .sum();
        ensure(
            (total - 1.0).abs() < 1e-8,
            format!("trial {trial}: probabilities sum to {total}"),
        )?;
    }

    // Finite-difference gradient check.
    let config = TrainingConfig::default();
    let h = 1e-5;
    for seed in 0..20u64 {
        let mut rng = Rng::derive(seed, "acceptance.fd");
        let mut model = random_model(&mut rng, 4, 4);
        for w in model.state_weights.values_mut().flatten() {
            *w *= 0.5;
        }
        let data: Vec<AttributedSentence> =
            (0..3).map(|_| random_sentence(&mut rng, 4, 5, 4)).collect();
        let (_, grad) = log_likelihood_and_gradient(&model, &data, &config).unwrap();
        let mut max_rel: f64 = 0.0;
        let attrs: Vec<String> = model.state_weights.keys().cloned().collect();
        let mut stencil = |plus: &CrfModel, minus: &CrfModel, analytic: f64| {
            let (lp, _) = log_likelihood_and_gradient(plus, &data, &config).unwrap();
            let (lm, _) = log_likelihood_and_gradient(minus, &data, &config).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            max_rel = max_rel.max((numeric - analytic).abs() / analytic.abs().max(1.0));
        };
        for attr in &attrs {
            for y in 0..4 {
                let mut plus = model.clone();
                plus.state_weights.get_mut(attr).unwrap()[y] += h;
                let mut minus = model.clone();
                minus.state_weights.get_mut(attr).unwrap()[y] -= h;
                stencil(&plus, &minus, grad.state[attr][y]);
            }
        }
        for idx in 0..16 {
            let mut plus = model.clone();
            plus.transition_weights[idx] += h;
            let mut minus = model.clone();
            minus.transition_weights[idx] -= h;
            stencil(&plus, &minus, grad.transition[idx]);
        }
        ensure(
            max_rel < 1e-4,
            format!("seed {seed}: gradient max rel err {max_rel}"),
        )?;
    }
    Ok(())
}

// ---------- criterion 2: trainer sanity ----------

fn criterion_trainer() -> Check {
    let sentence = AttributedSentence {
        tokens: ["x", "y", "x"]
            .iter()
            .zip(["A", "B", "A"])
            .map(|(w, l)| AttributedToken {
                attrs: vec![(format!("w={w}"), 1.0)],
                gold: l.to_string(),
            })
            .collect(),
    };
    let outcome = train(
        std::slice::from_ref(&sentence),
        &labels(2),
        &TrainingConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(
        viterbi(&outcome.model, &sentence) == vec!["A", "B", "A"],
        "single-sentence memorization failed",
    )?;
    ensure(
        outcome.objective_trace.windows(2).all(|p| p[1] >= p[0]),
        "objective trace decreased across an accepted step",
    )
}

// ---------- criterion 3: transforms ----------

fn criterion_transforms() -> Check {
    use TernarySymbol::{Neg, Pos, Zero};
    let row = [0.764120, 0.093741, -0.109514, 0.812259, 0.278912, 0.620007];
    ensure(
        binarize(&row, BinarizeMethod::A).unwrap() == vec![Pos, Pos, Zero, Pos, Pos, Pos],
        "method A sign mapping",
    )?;
    ensure(
        binarize(&row, BinarizeMethod::B).unwrap() == vec![Pos, Zero, Neg, Pos, Zero, Pos],
        "method B hand example",
    )?;
    ensure(
        binarize(&[4.0, 1.0, 1.0, -2.0], BinarizeMethod::C).unwrap() == vec![Pos, Pos, Pos, Neg],
        "method C hand example",
    )?;

    let mut rng = Rng::derive(5, "acceptance.scale");
    for trial in 0..1000 {
        let dim = 1 + rng.below(10);
        let x: Vec<f64> = (0..dim).map(|_| rng.uniform(-10.0, 10.0)).collect();
        let c = rng.uniform(0.001, 100.0);
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        for method in [BinarizeMethod::A, BinarizeMethod::B, BinarizeMethod::C] {
            ensure(
                binarize(&x, method).unwrap() == binarize(&scaled, method).unwrap(),
                format!("trial {trial}: scale covariance broke for {}", method.as_str()),
            )?;
        }
    }

    let mut table = EmbeddingTable::new(5);
    let mut rng = Rng::derive(3, "acceptance.sparse");
    for i in 0..20 {
        let v = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        table.insert(format!("w{i:02}"), v).unwrap();
    }
    let base = SparseCodingConfig {
        code_len: 50,
        seed: 11,
        ..Default::default()
    };
    for nonneg in [false, true] {
        let cfg = SparseCodingConfig { nonneg, ..base.clone() };
        let result = sparse_code(&table, &cfg).map_err(|e| e.to_string())?;
        let first = result.objective_trace[0];
        let last = *result.objective_trace.last().unwrap();
        ensure(last < first, format!("sparse objective {first} -> {last}"))?;
        let independent = sparse_objective(&result, &table, &cfg).map_err(|e| e.to_string())?;
        ensure(
            (last - independent).abs() <= 1e-8 * independent.abs().max(1.0),
            "sparse trace disagrees with independent objective",
        )?;
        if nonneg {
            ensure(
                result.codes.values().flatten().all(|&a| a >= 0.0),
                "NNSE produced a negative code",
            )?;
        }
    }
    let mut fractions = Vec::new();
    for delta in [0.1, 0.5, 1.0] {
        let cfg = SparseCodingConfig { delta, ..base.clone() };
        fractions.push(sparse_code(&table, &cfg).map_err(|e| e.to_string())?.zero_fraction());
    }
    ensure(
        fractions[0] <= fractions[1] && fractions[1] <= fractions[2],
        format!("zero fraction not monotone in delta: {fractions:?}"),
    )
}

// ---------- criterion 4: clustering ----------

/// Naive greedy Brown oracle: AMI of every candidate merge recomputed
/// from scratch.
struct NaiveBrown {
    vocab: Vec<String>,
    bigrams: BTreeMap<(usize, usize), u64>,
    assignment: BTreeMap<usize, usize>,
    active: BTreeSet<usize>,
}

impl NaiveBrown {
    fn new(text: &str) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for w in text.split_whitespace() {
            *counts.entry(w).or_insert(0) += 1;
        }
        let mut vocab: Vec<(&str, u64)> = counts.into_iter().collect();
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let rank: BTreeMap<&str, usize> =
            vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
        let mut bigrams = BTreeMap::new();
        for line in text.lines() {
            let ids: Vec<usize> = line.split_whitespace().map(|w| rank[w]).collect();
            for pair in ids.windows(2) {
                *bigrams.entry((pair[0], pair[1])).or_insert(0) += 1;
            }
        }
        NaiveBrown {
            vocab: vocab.into_iter().map(|(w, _)| w.to_string()).collect(),
            bigrams,
            assignment: BTreeMap::new(),
            active: BTreeSet::new(),
        }
    }

    fn ami(&self, merge: Option<(usize, usize)>) -> f64 {
        let cluster = |r: usize| {
            self.assignment.get(&r).map(|&c| match merge {
                Some((a, b)) if c == b => a,
                _ => c,
            })
        };
        let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut left: BTreeMap<usize, u64> = BTreeMap::new();
        let mut right: BTreeMap<usize, u64> = BTreeMap::new();
        let mut total = 0u64;
        for (&(u, v), &n) in &self.bigrams {
            let (Some(cu), Some(cv)) = (cluster(u), cluster(v)) else { continue };
            *joint.entry((cu, cv)).or_insert(0) += n;
            *left.entry(cu).or_insert(0) += n;
            *right.entry(cv).or_insert(0) += n;
            total += n;
        }
        if total == 0 {
            return 0.0;
        }
        let n = total as f64;
        joint
            .iter()
            .map(|(&(c, d), &count)| {
                let p = count as f64 / n;
                p * (p / ((left[&c] as f64 / n) * (right[&d] as f64 / n))).ln()
            })
            .sum()
    }

    fn merge_best(&mut self) -> (Vec<String>, Vec<String>, f64) {
        let ids: Vec<usize> = self.active.iter().copied().collect();
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let after = self.ami(Some((a, b)));
                if best.is_none_or(|(s, _, _)| after > s) {
                    best = Some((after, a, b));
                }
            }
        }
        let (_, a, b) = best.unwrap();
        let words = |id: usize| {
            let mut w: Vec<String> = self
                .assignment
                .iter()
                .filter(|(_, &c)| c == id)
                .map(|(&r, _)| self.vocab[r].clone())
                .collect();
            w.sort();
            w
        };
        let (lw, rw) = (words(a), words(b));
        for c in self.assignment.values_mut() {
            if *c == b {
                *c = a;
            }
        }
        self.active.remove(&b);
        (lw, rw, self.ami(None))
    }

    fn run(&mut self, num_clusters: usize) -> Vec<(Vec<String>, Vec<String>, f64)> {
        let mut merges = Vec::new();
        for seed in 0..num_clusters {
            self.assignment.insert(seed, seed);
            self.active.insert(seed);
        }
        for r in num_clusters..self.vocab.len() {
            self.assignment.insert(r, r);
            self.active.insert(r);
            merges.push(self.merge_best());
        }
        while self.active.len() > 1 {
            merges.push(self.merge_best());
        }
        merges
    }
}

fn criterion_clustering() -> Check {
    use wordrep_core::clusters::{brown_induce, kmeans_fit};
    let mut table = EmbeddingTable::new(2);
    for (w, v) in [
        ("a", vec![0.0, 0.0]),
        ("b", vec![0.0, 1.0]),
        ("c", vec![10.0, 0.0]),
        ("d", vec![10.0, 1.0]),
    ] {
        table.insert(w, v).unwrap();
    }
    for seed in 0..10u64 {
        let fit = kmeans_fit(&table, 2, seed, 100).map_err(|e| e.to_string())?;
        ensure(
            (fit.sse - 1.0).abs() < 1e-10,
            format!("seed {seed}: k-means missed the optimal partition (sse {})", fit.sse),
        )?;
        ensure(
            fit.sse_trace.windows(2).all(|p| p[1] <= p[0] + 1e-10),
            format!("seed {seed}: SSE trace increased"),
        )?;
    }
    let exact = kmeans_fit(&table, 4, 1, 100).map_err(|e| e.to_string())?;
    ensure(exact.sse.abs() < 1e-12, "k = #points should give sse 0")?;

    let corpus = "the dog ran . the cat ran . a dog sat . a cat sat .";
    for num_clusters in [1, 2, 3] {
        let model = brown_induce(corpus, num_clusters, 0).map_err(|e| e.to_string())?;
        let expected = NaiveBrown::new(corpus).run(num_clusters);
        ensure(
            model.merges.len() == expected.len(),
            format!("C = {num_clusters}: merge count differs"),
        )?;
        for (i, (record, (lw, rw, ami))) in model.merges.iter().zip(&expected).enumerate() {
            ensure(
                &record.left_words == lw
                    && &record.right_words == rw
                    && (record.ami_after - ami).abs() < 1e-10,
                format!("C = {num_clusters}, merge {i}: differs from naive oracle"),
            )?;
        }
        let paths: BTreeSet<&String> = model.paths.values().collect();
        for a in &paths {
            for b in &paths {
                ensure(
                    a == b || !b.starts_with(a.as_str()),
                    format!("paths not prefix-free: {a} prefixes {b}"),
                )?;
            }
        }
    }
    Ok(())
}

// ---------- criterion 5: prototypes ----------

fn corpus_of(pairs: &[(&str, &str)]) -> Corpus {
    let text: String =
        pairs.iter().map(|(w, l)| format!("{w} {l}\n")).collect::<String>() + "\n";
    parse_conll(&text, 0, Some(1), None).unwrap()
}

fn criterion_prototypes() -> Check {
    let mut rng = Rng::derive(9, "acceptance.npmi");
    for trial in 0..20 {
        let n = 5 + rng.below(30);
        let words = ["u", "v", "w", "x", "y"];
        let tags = ["O", "B-PER", "I-PER", "B-LOC"];
        let pairs: Vec<(&str, &str)> = (0..n)
            .map(|_| (words[rng.below(5)], tags[rng.below(4)]))
            .collect();
        let table = compute_npmi(&corpus_of(&pairs)).map_err(|e| e.to_string())?;
        for (&ref key, &v) in &table.npmi {
            ensure(
                (-1.0 - 1e-12..=1.0 + 1e-12).contains(&v),
                format!("trial {trial}: NPMI {v} out of bounds for {key:?}"),
            )?;
        }
    }

    let mut perfect = vec![("w", "B-PER"), ("w", "B-PER")];
    for w in ["a", "b", "c", "d", "e", "f", "g", "h"] {
        perfect.push((w, "O"));
    }
    let t = compute_npmi(&corpus_of(&perfect)).map_err(|e| e.to_string())?;
    let v = t.npmi[&("B-PER".to_string(), "w".to_string())];
    ensure((v - 1.0).abs() < 1e-12, format!("perfect association gave {v}"))?;

    let indep = vec![
        ("w", "B-X"), ("w", "B-X"), ("w", "O"), ("w", "O"), ("w", "O"),
        ("a", "B-X"), ("a", "B-X"), ("a", "O"), ("a", "O"), ("a", "O"),
    ];
    let t = compute_npmi(&corpus_of(&indep)).map_err(|e| e.to_string())?;
    let v = t.npmi[&("B-X".to_string(), "w".to_string())];
    ensure(v.abs() < 1e-12, format!("independence gave {v}"))?;

    let hand = vec![
        ("w", "B-X"), ("w", "O"), ("v", "B-X"), ("a", "O"),
        ("b", "O"), ("c", "O"), ("d", "O"), ("e", "O"),
    ];
    let t = compute_npmi(&corpus_of(&hand)).map_err(|e| e.to_string())?;
    let v = t.npmi[&("B-X".to_string(), "w".to_string())];
    let expect = 2f64.ln() / 8f64.ln();
    ensure((v - expect).abs() < 1e-12, format!("hand example gave {v}, want {expect}"))?;

    let mut protos = BTreeMap::new();
    protos.insert("B-X".to_string(), vec![("p".to_string(), 0.9)]);
    let table = PrototypeTable {
        m: 1,
        prototypes: protos,
        threshold: 0.5,
    };
    let mut emb = EmbeddingTable::new(4);
    emb.insert("p", vec![1.0, 2.0, 0.0, 0.0]).unwrap();
    emb.insert("q", vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    emb.insert("r", vec![1.0, 1.0, 1.0, 1.0]).unwrap();
    ensure(
        assign_prototypes(&table, &emb, "p") == vec!["proto=p"],
        "prototype did not self-assign",
    )?;
    // cosine(q, r) is exactly 0.5 (dot 1, norms 1 and 2).
    let mut half = BTreeMap::new();
    half.insert("B-X".to_string(), vec![("r".to_string(), 0.9)]);
    let table = PrototypeTable {
        m: 1,
        prototypes: half,
        threshold: 0.5,
    };
    let sim = cosine(emb.lookup("q").unwrap(), emb.lookup("r").unwrap()).unwrap();
    ensure(sim == 0.5, format!("constructed similarity is {sim}, not exactly 0.5"))?;
    ensure(
        assign_prototypes(&table, &emb, "q").is_empty(),
        "cosine exactly at the threshold must not assign",
    )
}

// ---------- criterion 6: scorer ----------

fn bio(sentences: &[&[&str]]) -> Corpus {
    let corpus = sentences
        .iter()
        .map(|labels| Sentence {
            tokens: labels.iter().map(|l| Token::new("t", *l)).collect(),
        })
        .collect();
    Corpus::from_sentences(corpus, "scored")
}

fn labels_of(corpus: &Corpus) -> Vec<Vec<String>> {
    corpus
        .sentences
        .iter()
        .map(|s| s.tokens.iter().map(|t| t.label.clone()).collect())
        .collect()
}

fn criterion_scorer() -> Check {
    let gold = bio(&[&["B-PER", "I-PER", "O", "B-LOC"]]);
    let report = score(&gold, &labels_of(&gold)).map_err(|e| e.to_string())?;
    ensure(
        report.overall.f1 == 100.0 && report.overall.precision == 100.0,
        "gold vs gold is not 100.00",
    )?;

    // 2 gold entities; prediction finds one exactly plus one spurious.
    let gold = bio(&[&["B-PER", "O", "O", "B-LOC", "O"]]);
    let pred = vec![vec![
        "B-PER".to_string(), "O".to_string(), "B-ORG".to_string(), "O".to_string(), "O".to_string(),
    ]];
    let report = score(&gold, &pred).map_err(|e| e.to_string())?;
    ensure(
        report.overall.precision == 50.0 && report.overall.recall == 50.0 && report.overall.f1 == 50.0,
        format!(
            "expected P=R=F1=50.00, got {:.2}/{:.2}/{:.2}",
            report.overall.precision, report.overall.recall, report.overall.f1
        ),
    )?;

    let gold = bio(&[&["B-PER", "I-PER"]]);
    let pred = vec![vec!["B-PER".to_string(), "B-PER".to_string()]];
    let report = score(&gold, &pred).map_err(|e| e.to_string())?;
    let c = &report.overall_counts;
    ensure(
        c.correct == 0 && c.pred == 2 && c.gold == 1
            && report.overall.precision == 0.0 && report.overall.recall == 0.0,
        "B-PER/I-PER vs B-PER/B-PER hand example",
    )?;

    // Swap symmetry on 50 random corpora.
    let mut rng = Rng::derive(13, "acceptance.swap");
    let tags = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC"];
    for trial in 0..50 {
        let sentences: Vec<Sentence> = (0..1 + rng.below(4))
            .map(|_| Sentence {
                tokens: (0..1 + rng.below(7))
                    .map(|_| Token::new("t", tags[rng.below(5)]))
                    .collect(),
            })
            .collect();
        let gold = Corpus::from_sentences(sentences, "g");
        let pred: Vec<Vec<String>> = gold
            .sentences
            .iter()
            .map(|s| s.tokens.iter().map(|_| tags[rng.below(5)].to_string()).collect())
            .collect();
        let forward = score(&gold, &pred).map_err(|e| e.to_string())?;
        let mut swapped = gold.clone();
        let mut swapped_pred = Vec::new();
        for (sentence, row) in swapped.sentences.iter_mut().zip(&pred) {
            let mut orig = Vec::new();
            for (token, new_label) in sentence.tokens.iter_mut().zip(row) {
                orig.push(std::mem::replace(&mut token.label, new_label.clone()));
            }
            swapped_pred.push(orig);
        }
        let backward = score(&swapped, &swapped_pred).map_err(|e| e.to_string())?;
        ensure(
            (forward.overall.precision - backward.overall.recall).abs() < 1e-12
                && (forward.overall.recall - backward.overall.precision).abs() < 1e-12,
            format!("trial {trial}: precision/recall swap symmetry broke"),
        )?;
    }
    Ok(())
}

// ---------- criterion 7: end-to-end synthetic ablation ----------

/// Pinned at the first verified run of the seed-7 synthetic ablation.
const PINNED_CE_MARGIN: f64 = 29.08;
const MARGIN_TOLERANCE: f64 = 0.5;

fn run_binary(args: &[&str]) -> Check {
    let output = Command::new(env!("CARGO_BIN_EXE_wordrep"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        output.status.success(),
        format!(
            "wordrep {:?} failed: {}",
            args,
            String::from_utf8_lossy(&output.stderr)
        ),
    )
}

fn criterion_ablation() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    run_binary(&["synth", "--seed", "7", "--out-dir", data.to_str().unwrap()])?;
    run_binary(&[
        "ablate",
        "--config",
        data.join("config.json").to_str().unwrap(),
        "--seed",
        "7",
        "--out-dir",
        out.to_str().unwrap(),
    ])?;
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("ablation.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure(json["partial"] == false, "ablation marked partial")?;
    let rows = json["rows"].as_array().ok_or("rows missing")?;
    let expected = [
        "Baseline", "+ DE", "+ SE", "+ NNSE", "+ BI (method A)", "+ BI (method B)",
        "+ BI (method C)", "+ CE", "+ Proto", "+ CE + Proto", "+ BC", "+ BC + Proto",
        "+ BC + CE", "+ BC + CE + Proto",
    ];
    ensure(rows.len() == 14, format!("expected 14 rows, got {}", rows.len()))?;
    let mut f1 = BTreeMap::new();
    for (row, want) in rows.iter().zip(expected) {
        let name = row["row"].as_str().ok_or("row name missing")?;
        ensure(name == want, format!("row {name:?} where {want:?} expected"))?;
        let value = row["f1"]["synthetic"].as_f64().ok_or("F1 missing")?;
        ensure(value.is_finite(), format!("row {name:?}: non-finite F1"))?;
        f1.insert(name.to_string(), value);
    }
    let margin = f1["+ CE"] - f1["Baseline"];
    ensure(margin > 0.0, format!("+ CE ({}) does not exceed Baseline ({})", f1["+ CE"], f1["Baseline"]))?;
    ensure(
        (margin - PINNED_CE_MARGIN).abs() <= MARGIN_TOLERANCE,
        format!("+ CE margin {margin:.2} drifted from pinned {PINNED_CE_MARGIN:.2} +- {MARGIN_TOLERANCE}"),
    )
}

// ---------- criterion 8: optional full reproduction ----------

fn criterion_reproduction() -> Option<Check> {
    let config = std::env::var("WORDREP_AQMAR_CONFIG").ok()?;
    Some((|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = dir.path().join("out");
        run_binary(&["ablate", "--config", &config, "--seed", "1", "--out-dir", out.to_str().unwrap()])?;
        let json: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("ablation.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let rows = json["rows"].as_array().ok_or("rows missing")?;
        let get = |name: &str| -> Option<f64> {
            rows.iter()
                .find(|r| r["row"] == name)
                .and_then(|r| r["f1"].as_object())
                .and_then(|m| m.values().next())
                .and_then(|v| v.as_f64())
        };
        let baseline = get("Baseline").ok_or("Baseline row missing")?;
        let bc = get("+ BC").ok_or("+ BC row missing")?;
        ensure(
            (baseline - 55.45).abs() <= 3.0,
            format!("baseline {baseline:.2} outside 55.45 +- 3.0"),
        )?;
        ensure(
            bc - baseline >= 4.0,
            format!("+ BC ({bc:.2}) does not exceed baseline ({baseline:.2}) by >= 4"),
        )
    })())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("1 CRF correctness", criterion_crf),
        ("2 trainer sanity", criterion_trainer),
        ("3 transforms", criterion_transforms),
        ("4 clustering", criterion_clustering),
        ("5 prototypes", criterion_prototypes),
        ("6 scorer", criterion_scorer),
        ("7 synthetic ablation", criterion_ablation),
    ];
    let mut failures = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(()) => println!("criterion {name}: PASS"),
            Err(message) => {
                println!("criterion {name}: FAIL ({message})");
                failures.push(format!("{name}: {message}"));
            }
        }
    }
    match criterion_reproduction() {
        None => println!("criterion 8 full reproduction: SKIP (optional; set WORDREP_AQMAR_CONFIG to run)"),
        Some(Ok(())) => println!("criterion 8 full reproduction: PASS"),
        Some(Err(message)) => {
            println!("criterion 8 full reproduction: FAIL ({message})");
            failures.push(format!("8: {message}"));
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
