//! Baseline and word-representation attribute extraction over a +-window
//! context.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::clusters::{
    brown_features, cluster_features, smallest_k_cluster, BrownModel, KMeansModel,
    NeighborClusters,
};
use crate::corpus::Sentence;
use crate::crf::{AttributedSentence, AttributedToken};
use crate::embeddings::EmbeddingTable;
use crate::error::{CoreError, Result};
use crate::prototypes::{assign_prototypes, PrototypeTable};
use crate::transforms::{ternary_attributes, BinarizeMethod, BinarizedTable, SparseVectors};

/// Which attribute families are emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTemplateSet {
    /// Context window half-width.
    pub window: usize,
    pub baseline: bool,
    pub de: bool,
    pub bi_a: bool,
    pub bi_b: bool,
    pub bi_c: bool,
    pub se: bool,
    pub nnse: bool,
    pub ce: bool,
    pub proto: bool,
    pub bc: bool,
    /// Multiplier on dense-embedding attribute values.
    pub de_scale: f64,
    /// Brown path prefix lengths; empty emits the raw path.
    pub brown_prefix_lengths: Vec<usize>,
    /// Compound cluster features on top of the per-k base attributes.
    pub ce_compound: bool,
}

impl FeatureTemplateSet {
    /// Baseline only, +-1 window.
    pub fn baseline() -> Self {
        FeatureTemplateSet {
            window: 1,
            baseline: true,
            de: false,
            bi_a: false,
            bi_b: false,
            bi_c: false,
            se: false,
            nnse: false,
            ce: false,
            proto: false,
            bc: false,
            de_scale: 1.0,
            brown_prefix_lengths: Vec::new(),
            ce_compound: true,
        }
    }

    pub fn any_enabled(&self) -> bool {
        self.baseline
            || self.de
            || self.bi_a
            || self.bi_b
            || self.bi_c
            || self.se
            || self.nnse
            || self.ce
            || self.proto
            || self.bc
    }

    fn needs_embeddings(&self) -> bool {
        self.de || self.proto
    }
}

/// Prebuilt resources the enabled families draw from.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureResources<'a> {
    pub embeddings: Option<&'a EmbeddingTable>,
    pub brown: Option<&'a BrownModel>,
    pub kmeans: Option<&'a KMeansModel>,
    pub prototypes: Option<&'a PrototypeTable>,
    pub bin_a: Option<&'a BinarizedTable>,
    pub bin_b: Option<&'a BinarizedTable>,
    pub bin_c: Option<&'a BinarizedTable>,
    pub sparse: Option<&'a SparseVectors>,
    pub nnsparse: Option<&'a SparseVectors>,
}

fn require<'a, T>(res: Option<&'a T>, family: &str) -> Result<&'a T> {
    res.ok_or_else(|| CoreError::MissingResource(family.to_string()))
}

/// Inserts the window offset into a module attribute: `ce.k2=1` at
/// offset -1 becomes `ce.k2[-1]=1`.
fn offset_tag(attr: &str, offset: i64) -> String {
    match attr.split_once('=') {
        Some((name, value)) => format!("{name}[{offset}]={value}"),
        None => format!("{attr}[{offset}]"),
    }
}

fn char_prefix(chars: &[char], n: usize) -> String {
    chars.iter().take(n).collect()
}

fn char_suffix(chars: &[char], n: usize) -> String {
    let skip = chars.len().saturating_sub(n);
    chars[skip..].iter().collect()
}

/// Materializes the attribute rows for one sentence. Every enabled family
/// must have its resource present, otherwise the error names the family.
pub fn extract_features(
    sentence: &Sentence,
    templates: &FeatureTemplateSet,
    resources: &FeatureResources,
) -> Result<AttributedSentence> {
    if !templates.any_enabled() {
        return Err(CoreError::InvalidArgument(
            "no feature family enabled".into(),
        ));
    }
    // Resource checks up front so failures surface before any work.
    if templates.needs_embeddings() {
        require(resources.embeddings, "DE")?;
    }
    if templates.bi_a {
        require(resources.bin_a, "BI-A")?;
    }
    if templates.bi_b {
        require(resources.bin_b, "BI-B")?;
    }
    if templates.bi_c {
        require(resources.bin_c, "BI-C")?;
    }
    if templates.se {
        require(resources.sparse, "SE")?;
    }
    if templates.nnse {
        require(resources.nnsparse, "NNSE")?;
    }
    if templates.ce {
        require(resources.kmeans, "CE")?;
    }
    if templates.proto {
        require(resources.prototypes, "Proto")?;
    }
    if templates.bc {
        require(resources.brown, "BC")?;
    }

    let n = sentence.tokens.len() as i64;
    let window = templates.window as i64;
    let mut out = Vec::with_capacity(sentence.tokens.len());
    for t in 0..n {
        let mut attrs: Vec<(String, f64)> = Vec::new();
        for o in -window..=window {
            let pos = t + o;
            if pos < 0 {
                attrs.push((format!("w[{o}]=<BOS>"), 1.0));
                continue;
            }
            if pos >= n {
                attrs.push((format!("w[{o}]=<EOS>"), 1.0));
                continue;
            }
            let token = &sentence.tokens[pos as usize];
            let word = token.surface.as_str();

            if templates.baseline {
                attrs.push((format!("w[{o}]={word}"), 1.0));
                if let Some(pos_tag) = &token.pos {
                    attrs.push((format!("pos[{o}]={pos_tag}"), 1.0));
                }
                let chars: Vec<char> = word.chars().collect();
                attrs.push((format!("len[{o}]={}", chars.len()), 1.0));
                for p in 1..=4usize {
                    attrs.push((format!("pre{p}[{o}]={}", char_prefix(&chars, p)), 1.0));
                    attrs.push((format!("suf{p}[{o}]={}", char_suffix(&chars, p)), 1.0));
                }
                for g in 1..=3usize {
                    attrs.push((format!("hng{g}[{o}]={}", char_prefix(&chars, g)), 1.0));
                    attrs.push((format!("tng{g}[{o}]={}", char_suffix(&chars, g)), 1.0));
                }
            }

            let mut oov_embedding = false;
            if templates.de {
                let table = resources.embeddings.unwrap();
                match table.lookup(word) {
                    Some(vector) => {
                        for (j, &x) in vector.iter().enumerate() {
                            attrs.push((format!("emb[{o}]{j}"), x * templates.de_scale));
                        }
                    }
                    None => oov_embedding = true,
                }
            }
            for (enabled, table, method) in [
                (templates.bi_a, resources.bin_a, BinarizeMethod::A),
                (templates.bi_b, resources.bin_b, BinarizeMethod::B),
                (templates.bi_c, resources.bin_c, BinarizeMethod::C),
            ] {
                if !enabled {
                    continue;
                }
                match table.unwrap().symbols.get(word) {
                    Some(symbols) => {
                        for attr in ternary_attributes(symbols, method, o as i32) {
                            attrs.push((attr, 1.0));
                        }
                    }
                    None => oov_embedding = true,
                }
            }
            for (enabled, vectors) in [
                (templates.se, resources.sparse),
                (templates.nnse, resources.nnsparse),
            ] {
                if !enabled {
                    continue;
                }
                match vectors.unwrap().codes.get(word) {
                    Some(code) => {
                        for &(j, v) in code {
                            attrs.push((format!("sp[{o}]{j}"), v));
                        }
                    }
                    None => oov_embedding = true,
                }
            }
            if templates.ce {
                let kmeans = resources.kmeans.unwrap();
                let context = if templates.ce_compound && o == 0 {
                    let neighbor = |p: i64| {
                        (0..n)
                            .contains(&p)
                            .then(|| {
                                smallest_k_cluster(
                                    kmeans,
                                    &sentence.tokens[p as usize].surface,
                                )
                            })
                            .flatten()
                    };
                    Some(NeighborClusters {
                        prev: neighbor(t - 1),
                        next: neighbor(t + 1),
                    })
                } else {
                    None
                };
                for attr in cluster_features(kmeans, word, templates.ce_compound, context) {
                    attrs.push((offset_tag(&attr, o), 1.0));
                }
            }
            if templates.bc {
                let brown = resources.brown.unwrap();
                for attr in brown_features(brown, word, &templates.brown_prefix_lengths) {
                    attrs.push((offset_tag(&attr, o), 1.0));
                }
            }
            if templates.proto && o == 0 {
                let protos = resources.prototypes.unwrap();
                let table = resources.embeddings.unwrap();
                if table.lookup(word).is_none() {
                    oov_embedding = true;
                }
                for attr in assign_prototypes(protos, table, word) {
                    attrs.push((offset_tag(&attr, o), 1.0));
                }
            }
            if oov_embedding {
                attrs.push((format!("oov[{o}]=1"), 1.0));
            }
        }
        out.push(AttributedToken {
            attrs,
            gold: sentence.tokens[t as usize].label.clone(),
        });
    }
    Ok(AttributedSentence { tokens: out })
}
