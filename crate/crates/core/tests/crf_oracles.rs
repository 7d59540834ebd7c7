//! Brute-force and finite-difference oracles for the CRF: Viterbi vs
//! exhaustive argmax, log-partition vs exhaustive logsumexp, probability
//! normalization, analytic vs numerical gradients, and trainer sanity.

use wordrep_core::crf::{
    log_likelihood_and_gradient, log_partition, sequence_score, train, viterbi,
    AttributedSentence, AttributedToken, CrfModel, TrainingConfig,
};
use wordrep_core::rng::Rng;

fn labels(k: usize) -> Vec<String> {
    ["A", "B", "C", "D"][..k].iter().map(|s| s.to_string()).collect()
}

fn random_model(rng: &mut Rng, num_labels: usize, num_attrs: usize) -> CrfModel {
    let mut model = CrfModel::zeroed(labels(num_labels), TrainingConfig::default());
    for a in 0..num_attrs {
        let weights: Vec<f64> = (0..num_labels).map(|_| rng.uniform(-1.5, 1.5)).collect();
        model.state_weights.insert(format!("a{a}"), weights);
    }
    for w in model.transition_weights.iter_mut() {
        *w = rng.uniform(-1.0, 1.0);
    }
    model
}

fn random_sentence(rng: &mut Rng, num_attrs: usize, max_len: usize, num_labels: usize) -> AttributedSentence {
    let len = 1 + rng.below(max_len);
    let tokens = (0..len)
        .map(|_| {
            let n = 1 + rng.below(3);
            let attrs = (0..n)
                .map(|_| (format!("a{}", rng.below(num_attrs)), rng.uniform(-1.0, 1.0)))
                .collect();
            AttributedToken {
                attrs,
                gold: labels(num_labels)[rng.below(num_labels)].clone(),
            }
        })
        .collect();
    AttributedSentence { tokens }
}

/// All label sequences of length n over k labels, as index vectors.
fn enumerate_sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |y| {
                    let mut next = prefix.clone();
                    next.push(y);
                    next
                })
            })
            .collect();
    }
    out
}

fn brute_force(model: &CrfModel, sentence: &AttributedSentence) -> (Vec<String>, f64, f64) {
    let k = model.labels.len();
    let n = sentence.tokens.len();
    let mut best_score = f64::NEG_INFINITY;
    let mut best_seq = vec![];
    let mut scores = vec![];
    for seq in enumerate_sequences(n, k) {
        let named: Vec<&str> = seq.iter().map(|&y| model.labels[y].as_str()).collect();
        let score = sequence_score(model, sentence, &named).unwrap();
        scores.push(score);
        // Strict > keeps the first (lowest label indices) maximum, matching
        // the decoder's tie-break.
        if score > best_score {
            best_score = score;
            best_seq = named.iter().map(|s| s.to_string()).collect();
        }
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    (best_seq, best_score, log_z)
}

#[test]
fn viterbi_and_partition_match_brute_force_100_instances() {
    let mut rng = Rng::derive(2024, "crf.oracle");
    for trial in 0..100 {
        let num_labels = 2 + rng.below(3); // 2..=4
        let model = random_model(&mut rng, num_labels, 5);
        let sentence = random_sentence(&mut rng, 5, 6, num_labels);
        let (expect_seq, expect_score, expect_log_z) = brute_force(&model, &sentence);

        let decoded = viterbi(&model, &sentence);
        assert_eq!(decoded, expect_seq, "trial {trial}");
        let refs: Vec<&str> = decoded.iter().map(|s| s.as_str()).collect();
        let decoded_score = sequence_score(&model, &sentence, &refs).unwrap();
        assert_eq!(decoded_score, expect_score, "trial {trial}");

        let log_z = log_partition(&model, &sentence);
        let rel = (log_z - expect_log_z).abs() / expect_log_z.abs().max(1.0);
        assert!(rel < 1e-8, "trial {trial}: {log_z} vs {expect_log_z}");
    }
}

#[test]
fn probabilities_normalize_by_enumeration() {
    let mut rng = Rng::derive(7, "crf.normalize");
    for _ in 0..20 {
        let num_labels = 2 + rng.below(3);
        let model = random_model(&mut rng, num_labels, 4);
        let sentence = random_sentence(&mut rng, 4, 6, num_labels);
        let log_z = log_partition(&model, &sentence);
        let mut total = 0.0;
        for seq in enumerate_sequences(sentence.tokens.len(), num_labels) {
            let named: Vec<&str> = seq.iter().map(|&y| model.labels[y].as_str()).collect();
            let score = sequence_score(&model, &sentence, &named).unwrap();
            total += (score - log_z).exp();
        }
        assert!((total - 1.0).abs() < 1e-8, "sum p = {total}");
    }
}

#[test]
fn gradient_matches_central_finite_differences() {
    let config = TrainingConfig::default();
    let h = 1e-5;
    for seed in 0..20u64 {
        let mut rng = Rng::derive(seed, "crf.fd");
        let num_labels = 4;
        let mut model = random_model(&mut rng, num_labels, 4);
        // Shrink weights so exp() stays well conditioned for the stencil.
        for w in model.state_weights.values_mut().flatten() {
            *w *= 0.5;
        }
        let data: Vec<AttributedSentence> = (0..3)
            .map(|_| random_sentence(&mut rng, 4, 5, num_labels))
            .collect();
        let (_, grad) = log_likelihood_and_gradient(&model, &data, &config).unwrap();

        let mut max_rel: f64 = 0.0;
        let attrs: Vec<String> = model.state_weights.keys().cloned().collect();
        for attr in &attrs {
            for y in 0..num_labels {
                let mut plus = model.clone();
                plus.state_weights.get_mut(attr).unwrap()[y] += h;
                let mut minus = model.clone();
                minus.state_weights.get_mut(attr).unwrap()[y] -= h;
                let (lp, _) = log_likelihood_and_gradient(&plus, &data, &config).unwrap();
                let (lm, _) = log_likelihood_and_gradient(&minus, &data, &config).unwrap();
                let numeric = (lp - lm) / (2.0 * h);
                let analytic = grad.state[attr][y];
                let rel = (numeric - analytic).abs() / analytic.abs().max(1.0);
                max_rel = max_rel.max(rel);
            }
        }
        for idx in 0..num_labels * num_labels {
            let mut plus = model.clone();
            plus.transition_weights[idx] += h;
            let mut minus = model.clone();
            minus.transition_weights[idx] -= h;
            let (lp, _) = log_likelihood_and_gradient(&plus, &data, &config).unwrap();
            let (lm, _) = log_likelihood_and_gradient(&minus, &data, &config).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grad.transition[idx];
            let rel = (numeric - analytic).abs() / analytic.abs().max(1.0);
            max_rel = max_rel.max(rel);
        }
        assert!(max_rel < 1e-4, "seed {seed}: max relative error {max_rel}");
    }
}

#[test]
fn zero_weights_give_uniform_distribution() {
    let model = CrfModel::zeroed(labels(4), TrainingConfig::default());
    let sentence = AttributedSentence {
        tokens: vec![AttributedToken {
            attrs: vec![("x".to_string(), 1.0)],
            gold: "A".to_string(),
        }],
    };
    let config = TrainingConfig::default();
    let (ll, grad) = log_likelihood_and_gradient(&model, &[sentence], &config).unwrap();
    assert!((ll - (-(4.0f64).ln())).abs() < 1e-12);
    assert!((grad.state["x"][0] - 0.75).abs() < 1e-12);
    for y in 1..4 {
        assert!((grad.state["x"][y] + 0.25).abs() < 1e-12);
    }
}

#[test]
fn empty_dataset_leaves_only_the_prior() {
    let mut rng = Rng::derive(3, "crf.prior");
    let model = random_model(&mut rng, 3, 4);
    let config = TrainingConfig {
        l2_sigma2: 2.0,
        ..Default::default()
    };
    let (ll, _) = log_likelihood_and_gradient(&model, &[], &config).unwrap();
    let norm2: f64 = model
        .state_weights
        .values()
        .flatten()
        .chain(&model.transition_weights)
        .map(|w| w * w)
        .sum();
    assert!((ll - (-norm2 / (2.0 * config.l2_sigma2))).abs() < 1e-10);
}

#[test]
fn trainer_memorizes_single_sentence() {
    let sentence = AttributedSentence {
        tokens: vec![
            AttributedToken {
                attrs: vec![("w=x".into(), 1.0)],
                gold: "A".into(),
            },
            AttributedToken {
                attrs: vec![("w=y".into(), 1.0)],
                gold: "B".into(),
            },
            AttributedToken {
                attrs: vec![("w=x".into(), 1.0)],
                gold: "A".into(),
            },
        ],
    };
    let outcome = train(
        std::slice::from_ref(&sentence),
        &labels(2),
        &TrainingConfig::default(),
    )
    .unwrap();
    assert_eq!(viterbi(&outcome.model, &sentence), vec!["A", "B", "A"]);
    // Accepted L-BFGS steps never decrease the objective.
    for pair in outcome.objective_trace.windows(2) {
        assert!(pair[1] >= pair[0]);
    }
}

#[test]
fn zero_iterations_return_zero_weights() {
    let sentence = AttributedSentence {
        tokens: vec![AttributedToken {
            attrs: vec![("f".into(), 1.0)],
            gold: "A".into(),
        }],
    };
    let config = TrainingConfig {
        max_iterations: 0,
        ..Default::default()
    };
    let outcome = train(&[sentence], &labels(2), &config).unwrap();
    assert!(outcome
        .model
        .state_weights
        .values()
        .flatten()
        .all(|&w| w == 0.0));
    assert!(outcome.model.transition_weights.iter().all(|&w| w == 0.0));
}

#[test]
fn viterbi_tie_break_prefers_first_label() {
    let model = CrfModel::zeroed(labels(2), TrainingConfig::default());
    let sentence = AttributedSentence {
        tokens: vec![
            AttributedToken {
                attrs: vec![],
                gold: "A".into(),
            };
            3
        ],
    };
    assert_eq!(viterbi(&model, &sentence), vec!["A", "A", "A"]);
}

#[test]
fn single_token_partition_is_logsumexp_of_state_scores() {
    let mut model = CrfModel::zeroed(labels(2), TrainingConfig::default());
    model
        .state_weights
        .insert("f".into(), vec![0.7, -0.3]);
    let sentence = AttributedSentence {
        tokens: vec![AttributedToken {
            attrs: vec![("f".into(), 2.0)],
            gold: "A".into(),
        }],
    };
    let expect = ((1.4f64).exp() + (-0.6f64).exp()).ln();
    assert!((log_partition(&model, &sentence) - expect).abs() < 1e-12);
}

#[test]
fn zero_weight_partition_is_n_ln_k() {
    let model = CrfModel::zeroed(labels(3), TrainingConfig::default());
    let sentence = AttributedSentence {
        tokens: vec![
            AttributedToken {
                attrs: vec![("f".into(), 1.0)],
                gold: "A".into(),
            };
            5
        ],
    };
    let expect = 5.0 * (3.0f64).ln();
    assert!((log_partition(&model, &sentence) - expect).abs() < 1e-10);
}

#[test]
fn unknown_gold_label_is_an_error() {
    let sentence = AttributedSentence {
        tokens: vec![AttributedToken {
            attrs: vec![("f".into(), 1.0)],
            gold: "Z".into(),
        }],
    };
    assert!(train(&[sentence], &labels(2), &TrainingConfig::default()).is_err());
}
