//! Seeded synthetic data generator: a BIO-tagged corpus whose entity
//! classes correlate with latent clusters of the generated embeddings.
//! Surface forms are random strings, so lexical features only memorize,
//! while the embedding geometry generalizes to unseen words.

use std::path::Path;

use wordrep_core::corpus::{serialize_conll, Corpus, Sentence, Token};
use wordrep_core::embeddings::{serialize_embeddings, EmbeddingFormat, EmbeddingTable};
use wordrep_core::rng::Rng;

use crate::config::{EmbeddingSource, ExperimentConfig};
use crate::error::Result;
use crate::formats::write_file;

const CLASSES: [&str; 3] = ["PER", "LOC", "ORG"];
const DIM: usize = 8;
const ENTITY_POOL: usize = 24; // words per class per role (B / I)
const O_POOL: usize = 60;

struct Lexicon {
    /// Per class: (B-pool, I-pool).
    entity: Vec<(Vec<String>, Vec<String>)>,
    outside: Vec<String>,
    embeddings: EmbeddingTable,
}

fn random_word(rng: &mut Rng, taken: &mut std::collections::BTreeSet<String>) -> String {
    loop {
        let len = 4 + rng.below(4);
        let word: String = (0..len)
            .map(|_| (b'a' + rng.below(26) as u8) as char)
            .collect();
        if taken.insert(word.clone()) {
            return word;
        }
    }
}

fn noisy(center: &[f64], rng: &mut Rng, spread: f64) -> Vec<f64> {
    center
        .iter()
        .map(|&c| c + rng.uniform(-spread, spread))
        .collect()
}

fn build_lexicon(seed: u64) -> Lexicon {
    let mut rng = Rng::derive(seed, "synth.lexicon");
    let mut taken = std::collections::BTreeSet::new();
    let mut embeddings = EmbeddingTable::new(DIM);

    // One well-separated center per (class, role) plus two for O words.
    let mut centers: Vec<Vec<f64>> = Vec::new();
    for i in 0..CLASSES.len() * 2 + 2 {
        let mut c: Vec<f64> = (0..DIM).map(|_| rng.uniform(-1.0, 1.0)).collect();
        c[i % DIM] += if i % 2 == 0 { 4.0 } else { -4.0 };
        c[(i * 3 + 1) % DIM] += 3.0;
        centers.push(c);
    }

    let mut entity = Vec::new();
    for (ci, _) in CLASSES.iter().enumerate() {
        let mut pools = (Vec::new(), Vec::new());
        for role in 0..2 {
            let center = &centers[ci * 2 + role];
            for _ in 0..ENTITY_POOL {
                let word = random_word(&mut rng, &mut taken);
                embeddings
                    .insert(word.clone(), noisy(center, &mut rng, 0.4))
                    .unwrap();
                if role == 0 {
                    pools.0.push(word);
                } else {
                    pools.1.push(word);
                }
            }
        }
        entity.push(pools);
    }
    let mut outside = Vec::new();
    for i in 0..O_POOL {
        let word = random_word(&mut rng, &mut taken);
        let center = &centers[CLASSES.len() * 2 + i % 2];
        embeddings
            .insert(word.clone(), noisy(center, &mut rng, 0.6))
            .unwrap();
        outside.push(word);
    }
    Lexicon {
        entity,
        outside,
        embeddings,
    }
}

/// Samples sentences; entity words come from the first `pool_cap` types
/// of each pool, so a larger cap on the test side yields words unseen in
/// training whose embedding cluster is still informative.
fn sample_corpus(
    lexicon: &Lexicon,
    rng: &mut Rng,
    sentences: usize,
    pool_cap: usize,
    name: &str,
) -> Corpus {
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let len = 6 + rng.below(6);
        let mut tokens: Vec<Token> = Vec::with_capacity(len);
        while tokens.len() < len {
            if rng.next_f64() < 0.3 {
                let class = rng.below(CLASSES.len());
                let (b_pool, i_pool) = &lexicon.entity[class];
                let b_word = &b_pool[rng.below(pool_cap.min(b_pool.len()))];
                tokens.push(Token::new(b_word.clone(), format!("B-{}", CLASSES[class])));
                if tokens.len() < len && rng.next_f64() < 0.4 {
                    let i_word = &i_pool[rng.below(pool_cap.min(i_pool.len()))];
                    tokens.push(Token::new(i_word.clone(), format!("I-{}", CLASSES[class])));
                }
            } else {
                let word = &lexicon.outside[rng.below(lexicon.outside.len())];
                tokens.push(Token::new(word.clone(), "O"));
            }
        }
        out.push(Sentence { tokens });
    }
    Corpus::from_sentences(out, name)
}

pub struct SynthOutput {
    pub train: Corpus,
    pub test: Corpus,
    pub embeddings: EmbeddingTable,
    pub raw_text: String,
}

pub fn generate(seed: u64, train_sentences: usize, test_sentences: usize) -> SynthOutput {
    let lexicon = build_lexicon(seed);
    let mut rng = Rng::derive(seed, "synth.corpus");
    // Training draws from 2/3 of each pool; test from the full pools.
    let train_cap = ENTITY_POOL * 2 / 3;
    let train = sample_corpus(&lexicon, &mut rng, train_sentences, train_cap, "train");
    let test = sample_corpus(&lexicon, &mut rng, test_sentences, ENTITY_POOL, "test");
    // Extra raw text gives Brown induction usable bigram statistics.
    let mut raw_rng = Rng::derive(seed, "synth.raw");
    let raw = sample_corpus(&lexicon, &mut raw_rng, 400, ENTITY_POOL, "raw");
    let raw_text: String = raw
        .sentences
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n");
    SynthOutput {
        train,
        test,
        embeddings: lexicon.embeddings,
        raw_text,
    }
}

/// Writes the corpus, embeddings, raw text, and a ready-to-run
/// synthetic-demo config into `dir`.
pub fn write_bundle(
    dir: &Path,
    seed: u64,
    train_sentences: usize,
    test_sentences: usize,
) -> Result<ExperimentConfig> {
    std::fs::create_dir_all(dir)
        .map_err(|e| crate::error::CliError::Data(format!("{}: {e}", dir.display())))?;
    let output = generate(seed, train_sentences, test_sentences);
    write_file(&dir.join("train.conll"), &serialize_conll(&output.train))?;
    write_file(&dir.join("test.conll"), &serialize_conll(&output.test))?;
    write_file(
        &dir.join("embeddings.vec"),
        &serialize_embeddings(&output.embeddings, EmbeddingFormat::Word2vecText),
    )?;
    write_file(&dir.join("raw.txt"), &output.raw_text)?;

    let mut config = ExperimentConfig::profile("synthetic-demo")?;
    config.train_path = Some(dir.join("train.conll"));
    config.test_path = Some(dir.join("test.conll"));
    config.raw_text_path = Some(dir.join("raw.txt"));
    config.embeddings = vec![EmbeddingSource {
        name: "synthetic".to_string(),
        path: dir.join("embeddings.vec"),
        format: "word2vec_text".to_string(),
    }];
    let mut text = serde_json::to_string_pretty(&config)?;
    text.push('\n');
    write_file(&dir.join("config.json"), &text)?;
    Ok(config)
}
