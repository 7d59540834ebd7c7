//! Builds and holds the word-representation resources the feature
//! families draw from, either freshly from config + seed or from
//! previously written resource files.

use wordrep_core::clusters::{brown_induce, kmeans_multi, BrownModel, KMeansModel};
use wordrep_core::corpus::Corpus;
use wordrep_core::crf::{
    extract_features, AttributedSentence, FeatureResources, FeatureTemplateSet,
};
use wordrep_core::embeddings::{parse_embeddings, EmbeddingTable};
use wordrep_core::prototypes::{compute_npmi, select_prototypes, PrototypeTable};
use wordrep_core::transforms::{
    binarize_table, sparse_code, BinarizeMethod, BinarizedTable, SparseVectors,
};

use crate::config::{EmbeddingSource, ExperimentConfig, FeatureFlags};
use crate::error::{CliError, Result};
use crate::formats::{
    binarized_from_string, brown_from_string, kmeans_from_string, prototypes_from_string,
    read_to_string, sparse_from_string,
};

#[derive(Default)]
pub struct BuiltResources {
    pub embeddings: Option<EmbeddingTable>,
    pub brown: Option<BrownModel>,
    pub kmeans: Option<KMeansModel>,
    pub prototypes: Option<PrototypeTable>,
    pub bin_a: Option<BinarizedTable>,
    pub bin_b: Option<BinarizedTable>,
    pub bin_c: Option<BinarizedTable>,
    pub sparse: Option<SparseVectors>,
    pub nnsparse: Option<SparseVectors>,
}

impl BuiltResources {
    pub fn as_refs(&self) -> FeatureResources<'_> {
        FeatureResources {
            embeddings: self.embeddings.as_ref(),
            brown: self.brown.as_ref(),
            kmeans: self.kmeans.as_ref(),
            prototypes: self.prototypes.as_ref(),
            bin_a: self.bin_a.as_ref(),
            bin_b: self.bin_b.as_ref(),
            bin_c: self.bin_c.as_ref(),
            sparse: self.sparse.as_ref(),
            nnsparse: self.nnsparse.as_ref(),
        }
    }
}

pub fn load_embedding_table(source: &EmbeddingSource) -> Result<EmbeddingTable> {
    let text = read_to_string(&source.path)?;
    let format = source.parsed_format()?;
    let (table, warnings) = parse_embeddings(&text, format)
        .map_err(|e| CliError::data(format!("{}: {e}", source.path.display())))?;
    for warning in warnings {
        eprintln!("warning: {}: {warning}", source.path.display());
    }
    Ok(table)
}

/// Raw text for Brown induction: the configured file, or the training
/// corpus token stream when none is given.
pub fn brown_raw_text(config: &ExperimentConfig, train: &Corpus) -> Result<String> {
    match &config.raw_text_path {
        Some(path) => read_to_string(path),
        None => Ok(train
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
            .join("\n")),
    }
}

/// Builds every resource the given flags require, all randomness derived
/// from the one seed via per-module namespaces.
pub fn build(
    config: &ExperimentConfig,
    flags: &FeatureFlags,
    source: Option<&EmbeddingSource>,
    seed: u64,
    train: &Corpus,
) -> Result<BuiltResources> {
    let mut built = BuiltResources::default();
    let paths = &config.resources;
    // The table itself is needed at extraction time for DE and Proto, and
    // at build time for any derived resource not loaded from a file.
    let needs_embeddings = flags.de
        || flags.proto
        || (flags.bi_a && paths.bin_a.is_none())
        || (flags.bi_b && paths.bin_b.is_none())
        || (flags.bi_c && paths.bin_c.is_none())
        || (flags.se && paths.sparse.is_none())
        || (flags.nnse && paths.nnsparse.is_none())
        || (flags.ce && paths.kmeans.is_none());
    if needs_embeddings {
        let source = source.ok_or_else(|| {
            CliError::usage("config has no embeddings entry but an embedding family is enabled")
        })?;
        built.embeddings = Some(load_embedding_table(source)?);
    }
    let table = built.embeddings.as_ref();

    if flags.bi_a {
        built.bin_a = Some(match &paths.bin_a {
            Some(p) => binarized_from_string(&read_to_string(p)?, BinarizeMethod::A)?,
            None => binarize_table(table.unwrap(), BinarizeMethod::A)?,
        });
    }
    if flags.bi_b {
        built.bin_b = Some(match &paths.bin_b {
            Some(p) => binarized_from_string(&read_to_string(p)?, BinarizeMethod::B)?,
            None => binarize_table(table.unwrap(), BinarizeMethod::B)?,
        });
    }
    if flags.bi_c {
        built.bin_c = Some(match &paths.bin_c {
            Some(p) => binarized_from_string(&read_to_string(p)?, BinarizeMethod::C)?,
            None => binarize_table(table.unwrap(), BinarizeMethod::C)?,
        });
    }
    if flags.se {
        built.sparse = Some(match &paths.sparse {
            Some(p) => sparse_from_string(&read_to_string(p)?)?,
            None => {
                let result = sparse_code(table.unwrap(), &config.sparse.to_core(seed, false))?;
                SparseVectors::from_result(&result, config.sparse.code_len)
            }
        });
    }
    if flags.nnse {
        built.nnsparse = Some(match &paths.nnsparse {
            Some(p) => sparse_from_string(&read_to_string(p)?)?,
            None => {
                let result = sparse_code(table.unwrap(), &config.sparse.to_core(seed, true))?;
                SparseVectors::from_result(&result, config.sparse.code_len)
            }
        });
    }
    if flags.ce {
        built.kmeans = Some(match &paths.kmeans {
            Some(p) => kmeans_from_string(&read_to_string(p)?)?,
            None => kmeans_multi(table.unwrap(), &config.kmeans_ks, seed)?,
        });
    }
    if flags.proto {
        built.prototypes = Some(match &paths.prototypes {
            Some(p) => prototypes_from_string(&read_to_string(p)?, config.proto_threshold)?,
            None => {
                let npmi = compute_npmi(train)?;
                select_prototypes(&npmi, config.proto_m, config.proto_threshold)?
            }
        });
    }
    if flags.bc {
        built.brown = Some(match &paths.brown {
            Some(p) => brown_from_string(&read_to_string(p)?)?,
            None => {
                let raw = brown_raw_text(config, train)?;
                brown_induce(&raw, config.brown_clusters, config.brown_min_count)?
            }
        });
    }
    Ok(built)
}

pub fn extract_corpus(
    corpus: &Corpus,
    templates: &FeatureTemplateSet,
    resources: &BuiltResources,
) -> Result<Vec<AttributedSentence>> {
    let refs = resources.as_refs();
    corpus
        .sentences
        .iter()
        .map(|s| extract_features(s, templates, &refs).map_err(CliError::from))
        .collect()
}

/// Training label inventory, sorted for a deterministic index order.
pub fn label_list(corpus: &Corpus) -> Vec<String> {
    corpus.tagset.iter().cloned().collect()
}
