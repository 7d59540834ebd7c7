//! Lloyd's k-means with k-means++ seeding over embedding tables, run at
//! several granularities, plus cluster attribute emission.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::embeddings::EmbeddingTable;
use crate::error::{CoreError, Result};
use crate::rng::Rng;

/// One fitted granularity.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: HashMap<String, usize>,
    pub sse: f64,
    /// SSE recorded after each assignment step, plus the final value.
    pub sse_trace: Vec<f64>,
}

/// Assignments at every requested granularity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KMeansModel {
    pub per_k: BTreeMap<usize, KMeansFit>,
}

/// Neighbor cluster ids at the smallest granularity, for compound
/// features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NeighborClusters {
    pub prev: Option<usize>,
    pub next: Option<usize>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ initialization. Words are processed in
/// lexicographic order, so the result depends on the word set and seed but
/// not on file order. Empty clusters are reseeded to the point farthest
/// from its current centroid.
pub fn kmeans_fit(
    table: &EmbeddingTable,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<KMeansFit> {
    if k < 1 {
        return Err(CoreError::InvalidArgument("k must be >= 1".into()));
    }
    let words = table.sorted_words();
    let n = words.len();
    if k > n {
        return Err(CoreError::InvalidArgument(format!(
            "k = {k} exceeds table size {n}"
        )));
    }
    let points: Vec<&[f64]> = words.iter().map(|w| table.lookup(w).unwrap()).collect();
    let mut rng = Rng::derive(seed, "clusters.kmeans");

    // k-means++ seeding.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.below(n);
    centroids.push(points[first].to_vec());
    chosen[first] = true;
    let mut dist2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut pick = None;
            for (i, &d) in dist2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                target -= d;
                if target <= 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| dist2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // All remaining points coincide with a centroid; take the
            // first unchosen one.
            chosen
                .iter()
                .position(|&c| !c)
                .ok_or_else(|| CoreError::InvalidArgument("k exceeds distinct points".into()))?
        };
        chosen[idx] = true;
        let c = points[idx].to_vec();
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, &c);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
        centroids.push(c);
    }

    let dim = table.dim;
    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        // Assignment step; ties go to the lower cluster index.
        let mut changed = false;
        let mut sse = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
            sse += best_d;
        }
        trace.push(sse);
        if !changed && trace.len() > 1 {
            break;
        }

        // Update step.
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut sizes = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            sizes[c] += 1;
            for (s, &v) in sums[c].iter_mut().zip(*p) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                // Reseed to the point farthest from its assigned centroid.
                let far = (0..n)
                    .max_by(|&i, &j| {
                        let di = sq_dist(points[i], &centroids[assignment[i]]);
                        let dj = sq_dist(points[j], &centroids[assignment[j]]);
                        di.total_cmp(&dj)
                    })
                    .unwrap();
                centroids[c] = points[far].to_vec();
            } else {
                for (j, s) in sums[c].iter().enumerate() {
                    centroids[c][j] = s / sizes[c] as f64;
                }
            }
        }
    }

    let sse: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| sq_dist(p, &centroids[assignment[i]]))
        .sum();
    trace.push(sse);

    Ok(KMeansFit {
        centroids,
        assignment: words
            .iter()
            .zip(&assignment)
            .map(|(w, &c)| (w.to_string(), c))
            .collect(),
        sse,
        sse_trace: trace,
    })
}

/// Runs [`kmeans_fit`] once per granularity with per-k derived seeds
/// (`seed + k`).
pub fn kmeans_multi(table: &EmbeddingTable, ks: &[usize], seed: u64) -> Result<KMeansModel> {
    if ks.is_empty() {
        return Err(CoreError::InvalidArgument("no granularities given".into()));
    }
    let mut per_k = BTreeMap::new();
    for &k in ks {
        per_k.insert(k, kmeans_fit(table, k, seed + k as u64, 100)?);
    }
    Ok(KMeansModel { per_k })
}

/// Base attributes `ce.k<k>=<cluster>` per granularity; with `compound`
/// also internal conjunctions over consecutive granularities and, when
/// neighbor context is given, conjunctions of the smallest-k cluster with
/// the previous/next word's smallest-k cluster. Unknown words emit
/// `ce=UNK`.
pub fn cluster_features(
    model: &KMeansModel,
    word: &str,
    compound: bool,
    context: Option<NeighborClusters>,
) -> Vec<String> {
    let assigned: Vec<(usize, usize)> = model
        .per_k
        .iter()
        .filter_map(|(&k, fit)| fit.assignment.get(word).map(|&c| (k, c)))
        .collect();
    if assigned.is_empty() {
        return alloc::vec!["ce=UNK".to_string()];
    }
    let mut attrs: Vec<String> = assigned
        .iter()
        .map(|(k, c)| format!("ce.k{k}={c}"))
        .collect();
    if compound {
        for pair in assigned.windows(2) {
            let (k1, c1) = pair[0];
            let (k2, c2) = pair[1];
            attrs.push(format!("ce.k{k1}&k{k2}={c1}_{c2}"));
        }
        if let Some(ctx) = context {
            let (k, c) = assigned[0];
            if let Some(p) = ctx.prev {
                attrs.push(format!("ce.k{k}.prev={p}_{c}"));
            }
            if let Some(nx) = ctx.next {
                attrs.push(format!("ce.k{k}.next={c}_{nx}"));
            }
        }
    }
    attrs
}

/// Smallest-granularity cluster id, used as neighbor context for
/// compound features.
pub fn smallest_k_cluster(model: &KMeansModel, word: &str) -> Option<usize> {
    model
        .per_k
        .iter()
        .next()
        .and_then(|(_, fit)| fit.assignment.get(word).copied())
}
