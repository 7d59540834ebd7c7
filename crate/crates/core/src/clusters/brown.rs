//! Greedy agglomerative Brown clustering over bigram statistics, in the
//! active-set formulation: the C most frequent words seed the active
//! clusters, every further word is inserted as its own cluster and the
//! pair whose merge loses the least average mutual information (AMI) is
//! collapsed, and the surviving C clusters are finally merged to a single
//! root to define binary-tree paths.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{CoreError, Result};
use crate::math;

/// Path assigned to words filtered out by `min_count`.
pub const UNK_PATH: &str = "UNK";

/// Result of Brown induction.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownModel {
    /// word -> bit-string path from the root of the merge tree.
    pub paths: HashMap<String, String>,
    /// word -> corpus frequency (retained words only).
    pub counts: HashMap<String, u64>,
    pub num_clusters: usize,
    /// One record per merge, in order, across both phases.
    pub merges: Vec<MergeRecord>,
}

/// A single greedy merge, with the AMI of the clustering after it.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeRecord {
    pub left_words: Vec<String>,
    pub right_words: Vec<String>,
    pub ami_after: f64,
    /// True for the tree-building merges after all words are placed.
    pub final_phase: bool,
}

struct ClusterStats {
    rows: BTreeMap<u32, BTreeMap<u32, u64>>,
    cols: BTreeMap<u32, BTreeMap<u32, u64>>,
    left_marg: BTreeMap<u32, u64>,
    right_marg: BTreeMap<u32, u64>,
    total: u64,
}

const MERGED: u32 = u32::MAX;

impl ClusterStats {
    fn new() -> Self {
        ClusterStats {
            rows: BTreeMap::new(),
            cols: BTreeMap::new(),
            left_marg: BTreeMap::new(),
            right_marg: BTreeMap::new(),
            total: 0,
        }
    }

    fn add(&mut self, c: u32, d: u32, n: u64) {
        *self.rows.entry(c).or_default().entry(d).or_insert(0) += n;
        *self.cols.entry(d).or_default().entry(c).or_insert(0) += n;
        *self.left_marg.entry(c).or_insert(0) += n;
        *self.right_marg.entry(d).or_insert(0) += n;
        self.total += n;
    }

    fn term(&self, n: u64, lm: u64, rm: u64) -> f64 {
        let total = self.total as f64;
        let p = n as f64 / total;
        p * math::ln((n as f64 * total) / (lm as f64 * rm as f64))
    }

    fn ami(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for (&c, row) in &self.rows {
            let lm = self.left_marg[&c];
            for (&d, &n) in row {
                sum += self.term(n, lm, self.right_marg[&d]);
            }
        }
        sum
    }

    /// Change in AMI if clusters `a` and `b` were merged. Only cells in
    /// rows/cols a and b and the merged marginals are affected.
    fn merge_delta(&self, a: u32, b: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut before = 0.0;
        for &c in &[a, b] {
            if let (Some(row), Some(&lm)) = (self.rows.get(&c), self.left_marg.get(&c)) {
                for (&d, &n) in row {
                    before += self.term(n, lm, self.right_marg[&d]);
                }
            }
        }
        for &d in &[a, b] {
            if let (Some(col), Some(&rm)) = (self.cols.get(&d), self.right_marg.get(&d)) {
                for (&c, &n) in col {
                    if c != a && c != b {
                        before += self.term(n, self.left_marg[&c], rm);
                    }
                }
            }
        }

        let lm_m = self.left_marg.get(&a).copied().unwrap_or(0)
            + self.left_marg.get(&b).copied().unwrap_or(0);
        let rm_m = self.right_marg.get(&a).copied().unwrap_or(0)
            + self.right_marg.get(&b).copied().unwrap_or(0);

        let mut merged_row: BTreeMap<u32, u64> = BTreeMap::new();
        for &c in &[a, b] {
            if let Some(row) = self.rows.get(&c) {
                for (&d, &n) in row {
                    let key = if d == a || d == b { MERGED } else { d };
                    *merged_row.entry(key).or_insert(0) += n;
                }
            }
        }
        let mut merged_col: BTreeMap<u32, u64> = BTreeMap::new();
        for &d in &[a, b] {
            if let Some(col) = self.cols.get(&d) {
                for (&c, &n) in col {
                    if c != a && c != b {
                        *merged_col.entry(c).or_insert(0) += n;
                    }
                }
            }
        }

        let mut after = 0.0;
        for (&d, &n) in &merged_row {
            let rm = if d == MERGED { rm_m } else { self.right_marg[&d] };
            after += self.term(n, lm_m, rm);
        }
        for (&c, &n) in &merged_col {
            after += self.term(n, self.left_marg[&c], rm_m);
        }
        after - before
    }

    /// Collapses cluster `b` into cluster `a`.
    fn merge(&mut self, a: u32, b: u32) {
        // Redirect cells (c, b) -> (c, a) for c outside {a, b}.
        if let Some(col) = self.cols.remove(&b) {
            for (c, n) in col {
                if c == a || c == b {
                    // handled through the row moves below
                    self.cols.entry(b).or_default().insert(c, n);
                    continue;
                }
                let row = self.rows.get_mut(&c).unwrap();
                row.remove(&b);
                *row.entry(a).or_insert(0) += n;
                *self.cols.entry(a).or_default().entry(c).or_insert(0) += n;
            }
        }
        // Move row b into row a, mapping column b -> a.
        let row_b = self.rows.remove(&b).unwrap_or_default();
        for (d, n) in row_b {
            let d2 = if d == b { a } else { d };
            *self.rows.entry(a).or_default().entry(d2).or_insert(0) += n;
            let col = self.cols.entry(d2).or_default();
            *col.entry(a).or_insert(0) += n;
            col.remove(&b);
        }
        // Cells (a, b) inside row a still point at column b.
        if let Some(row_a) = self.rows.get_mut(&a) {
            if let Some(n) = row_a.remove(&b) {
                *row_a.entry(a).or_insert(0) += n;
                *self.cols.entry(a).or_default().entry(a).or_insert(0) += n;
            }
        }
        self.cols.remove(&b);

        let lm_b = self.left_marg.remove(&b).unwrap_or(0);
        if lm_b > 0 {
            *self.left_marg.entry(a).or_insert(0) += lm_b;
        }
        let rm_b = self.right_marg.remove(&b).unwrap_or(0);
        if rm_b > 0 {
            *self.right_marg.entry(a).or_insert(0) += rm_b;
        }
    }
}

enum TreeNode {
    Leaf(u32),
    Internal(usize, usize),
}

/// Induces `num_clusters` Brown clusters from whitespace-tokenized text
/// (one or more sentences per line; bigrams do not cross lines). Words
/// with count below `min_count` are dropped and mapped to [`UNK_PATH`].
pub fn brown_induce(text: &str, num_clusters: usize, min_count: u64) -> Result<BrownModel> {
    if num_clusters < 1 {
        return Err(CoreError::InvalidArgument("need at least 1 cluster".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for word in text.split_whitespace() {
        *counts.entry(word.to_string()).or_insert(0) += 1;
    }
    counts.retain(|_, &mut c| c >= min_count.max(1));
    if counts.is_empty() {
        return Err(CoreError::EmptyInput("token stream after filtering".into()));
    }
    if num_clusters > counts.len() {
        return Err(CoreError::InvalidArgument(format!(
            "{} clusters requested but only {} word types retained",
            num_clusters,
            counts.len()
        )));
    }

    // Ranked vocabulary: descending count, lexicographic tie-break.
    let mut vocab: Vec<(String, u64)> = counts.iter().map(|(w, &c)| (w.clone(), c)).collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let rank: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (w.as_str(), i as u32))
        .collect();

    // Word-level bigram adjacency over retained tokens, per line.
    let mut word_next: HashMap<u32, BTreeMap<u32, u64>> = HashMap::new();
    let mut word_prev: HashMap<u32, BTreeMap<u32, u64>> = HashMap::new();
    for line in text.lines() {
        let ids: Vec<u32> = line
            .split_whitespace()
            .filter_map(|w| rank.get(w).copied())
            .collect();
        for pair in ids.windows(2) {
            *word_next
                .entry(pair[0])
                .or_default()
                .entry(pair[1])
                .or_insert(0) += 1;
            *word_prev
                .entry(pair[1])
                .or_default()
                .entry(pair[0])
                .or_insert(0) += 1;
        }
    }

    let mut stats = ClusterStats::new();
    let mut cluster_words: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut word_cluster: HashMap<u32, u32> = HashMap::new();
    let mut active: Vec<u32> = Vec::new();
    let mut merges: Vec<MergeRecord> = Vec::new();

    let word_of = |r: u32| vocab[r as usize].0.clone();
    let words_of = |ws: &[u32]| {
        let mut out: Vec<String> = ws.iter().map(|&r| vocab[r as usize].0.clone()).collect();
        out.sort();
        out
    };

    let place = |r: u32,
                     cid: u32,
                     stats: &mut ClusterStats,
                     word_cluster: &mut HashMap<u32, u32>,
                     cluster_words: &mut BTreeMap<u32, Vec<u32>>| {
        word_cluster.insert(r, cid);
        cluster_words.insert(cid, alloc::vec![r]);
        if let Some(next) = word_next.get(&r) {
            for (&u, &n) in next {
                if let Some(&cu) = word_cluster.get(&u) {
                    stats.add(cid, cu, n);
                }
            }
        }
        if let Some(prev) = word_prev.get(&r) {
            for (&u, &n) in prev {
                if u == r {
                    continue; // the self bigram was added in the next-loop
                }
                if let Some(&cu) = word_cluster.get(&u) {
                    stats.add(cu, cid, n);
                }
            }
        }
    };

    for seed in 0..num_clusters as u32 {
        place(seed, seed, &mut stats, &mut word_cluster, &mut cluster_words);
        active.push(seed);
    }

    let best_pair = |stats: &ClusterStats, active: &[u32]| -> (u32, u32) {
        let mut best: Option<(f64, u32, u32)> = None;
        for (i, &a) in active.iter().enumerate() {
            for &b in &active[i + 1..] {
                let delta = stats.merge_delta(a, b);
                let better = match best {
                    None => true,
                    Some((bd, _, _)) => delta > bd,
                };
                if better {
                    best = Some((delta, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least one candidate pair");
        (a, b)
    };

    // Insertion phase: place each remaining word, then collapse the
    // cheapest pair to keep the active set at num_clusters.
    for r in num_clusters as u32..vocab.len() as u32 {
        place(r, r, &mut stats, &mut word_cluster, &mut cluster_words);
        active.push(r);
        active.sort_unstable();
        let (a, b) = best_pair(&stats, &active);
        let left = words_of(&cluster_words[&a]);
        let right = words_of(&cluster_words[&b]);
        stats.merge(a, b);
        let moved = cluster_words.remove(&b).unwrap();
        for &w in &moved {
            word_cluster.insert(w, a);
        }
        cluster_words.get_mut(&a).unwrap().extend(moved);
        active.retain(|&c| c != b);
        merges.push(MergeRecord {
            left_words: left,
            right_words: right,
            ami_after: stats.ami(),
            final_phase: false,
        });
    }

    // Final phase: merge the surviving clusters down to a root, recording
    // the binary tree. Lower cluster id takes the 0 branch.
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut node_of: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &active {
        nodes.push(TreeNode::Leaf(c));
        node_of.insert(c, nodes.len() - 1);
    }
    while active.len() > 1 {
        let (a, b) = best_pair(&stats, &active);
        let left = words_of(&cluster_words[&a]);
        let right = words_of(&cluster_words[&b]);
        stats.merge(a, b);
        let moved = cluster_words.remove(&b).unwrap();
        cluster_words.get_mut(&a).unwrap().extend(moved);
        active.retain(|&c| c != b);
        nodes.push(TreeNode::Internal(node_of[&a], node_of[&b]));
        let parent = nodes.len() - 1;
        node_of.insert(a, parent);
        node_of.remove(&b);
        merges.push(MergeRecord {
            left_words: left,
            right_words: right,
            ami_after: stats.ami(),
            final_phase: true,
        });
    }

    // Walk the tree to assign leaf paths.
    let mut leaf_paths: BTreeMap<u32, String> = BTreeMap::new();
    let root = nodes.len() - 1;
    let mut stack: Vec<(usize, String)> = alloc::vec![(root, String::new())];
    while let Some((idx, path)) = stack.pop() {
        match &nodes[idx] {
            TreeNode::Leaf(c) => {
                let path = if path.is_empty() { "0".to_string() } else { path };
                leaf_paths.insert(*c, path);
            }
            TreeNode::Internal(l, r) => {
                stack.push((*l, format!("{path}0")));
                stack.push((*r, format!("{path}1")));
            }
        }
    }

    // word_cluster was kept current through the insertion phase, so it
    // points exactly at the leaf clusters of the final tree.
    let mut paths: HashMap<String, String> = HashMap::new();
    for (&r, &c) in &word_cluster {
        paths.insert(word_of(r), leaf_paths[&c].clone());
    }

    Ok(BrownModel {
        paths,
        counts,
        num_clusters,
        merges,
    })
}

/// Path-prefix attributes: `bc<p>=<prefix>` per requested length, the full
/// path when shorter. Unknown words emit a single `bc=UNK`.
pub fn brown_features(model: &BrownModel, word: &str, prefix_lengths: &[usize]) -> Vec<String> {
    match model.paths.get(word) {
        None => alloc::vec![format!("bc={UNK_PATH}")],
        Some(path) if path == UNK_PATH => alloc::vec![format!("bc={UNK_PATH}")],
        Some(path) => {
            if prefix_lengths.is_empty() {
                return alloc::vec![format!("bc={path}")];
            }
            prefix_lengths
                .iter()
                .map(|&p| {
                    let prefix: String = path.chars().take(p).collect();
                    format!("bc{p}={prefix}")
                })
                .collect()
        }
    }
}
