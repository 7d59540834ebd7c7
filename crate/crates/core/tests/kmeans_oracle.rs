//! k-means oracles: brute-force optimal partition on a tiny point set,
//! trace monotonicity, degenerate k values, and insertion-order
//! invariance.

use wordrep_core::clusters::{kmeans_fit, kmeans_multi};
use wordrep_core::embeddings::EmbeddingTable;

fn table_of(points: &[(&str, Vec<f64>)]) -> EmbeddingTable {
    let mut table = EmbeddingTable::new(points[0].1.len());
    for (word, v) in points {
        table.insert(*word, v.clone()).unwrap();
    }
    table
}

fn four_points() -> EmbeddingTable {
    table_of(&[
        ("a", vec![0.0, 0.0]),
        ("b", vec![0.0, 1.0]),
        ("c", vec![10.0, 0.0]),
        ("d", vec![10.0, 1.0]),
    ])
}

/// SSE of the best 2-partition, by exhaustive enumeration of the 2^n
/// assignments (both clusters non-empty), centroids at cluster means.
fn brute_force_best_sse(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let mut sse = 0.0;
        for side in 0..2 {
            let members: Vec<&Vec<f64>> = (0..n)
                .filter(|&i| (mask >> i) & 1 == side)
                .map(|i| &points[i])
                .collect();
            if members.is_empty() {
                sse = f64::INFINITY;
                break;
            }
            let mut mean = vec![0.0; dim];
            for p in &members {
                for (m, x) in mean.iter_mut().zip(p.iter()) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= members.len() as f64;
            }
            for p in &members {
                sse += p
                    .iter()
                    .zip(&mean)
                    .map(|(x, m)| (x - m) * (x - m))
                    .sum::<f64>();
            }
        }
        best = best.min(sse);
    }
    best
}

#[test]
fn recovers_optimal_two_clustering() {
    let table = four_points();
    let points: Vec<Vec<f64>> = ["a", "b", "c", "d"]
        .iter()
        .map(|w| table.lookup(w).unwrap().to_vec())
        .collect();
    let optimum = brute_force_best_sse(&points);
    assert!((optimum - 1.0).abs() < 1e-12);

    for seed in 0..20u64 {
        let fit = kmeans_fit(&table, 2, seed, 100).unwrap();
        assert!(
            (fit.sse - optimum).abs() < 1e-10,
            "seed {seed}: sse {}",
            fit.sse
        );
        assert_eq!(fit.assignment["a"], fit.assignment["b"], "seed {seed}");
        assert_eq!(fit.assignment["c"], fit.assignment["d"], "seed {seed}");
        assert_ne!(fit.assignment["a"], fit.assignment["c"], "seed {seed}");
    }
}

#[test]
fn sse_trace_is_non_increasing() {
    let table = table_of(&[
        ("a", vec![0.1, 3.0]),
        ("b", vec![2.0, -1.0]),
        ("c", vec![-4.0, 0.5]),
        ("d", vec![1.5, 1.5]),
        ("e", vec![-3.0, 2.0]),
        ("f", vec![0.0, -2.0]),
        ("g", vec![5.0, 5.0]),
    ]);
    for k in [2, 3] {
        for seed in 0..5u64 {
            let fit = kmeans_fit(&table, k, seed, 100).unwrap();
            assert!(!fit.sse_trace.is_empty());
            for pair in fit.sse_trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-10, "k {k} seed {seed}");
            }
            assert_eq!(*fit.sse_trace.last().unwrap(), fit.sse);
        }
    }
}

#[test]
fn k_equal_to_points_gives_zero_sse() {
    let table = four_points();
    let fit = kmeans_fit(&table, 4, 7, 100).unwrap();
    assert!(fit.sse.abs() < 1e-12);
    let mut ids: Vec<usize> = fit.assignment.values().copied().collect();
    ids.sort();
    assert_eq!(ids, vec![0, 1, 2, 3]);
}

#[test]
fn k_one_centroid_is_the_mean() {
    let table = four_points();
    let fit = kmeans_fit(&table, 1, 0, 100).unwrap();
    assert_eq!(fit.centroids.len(), 1);
    assert!((fit.centroids[0][0] - 5.0).abs() < 1e-12);
    assert!((fit.centroids[0][1] - 0.5).abs() < 1e-12);
}

#[test]
fn k_exceeding_points_is_an_error() {
    assert!(kmeans_fit(&four_points(), 5, 0, 100).is_err());
}

#[test]
fn insertion_order_does_not_change_the_fit() {
    let pts = [
        ("a", vec![0.0, 0.0]),
        ("b", vec![0.0, 1.0]),
        ("c", vec![10.0, 0.0]),
        ("d", vec![10.0, 1.0]),
        ("e", vec![5.0, 5.0]),
    ];
    let fwd = table_of(&pts);
    let mut rev_pts = pts.clone();
    rev_pts.reverse();
    let rev = table_of(&rev_pts);
    for seed in 0..5u64 {
        let f1 = kmeans_fit(&fwd, 2, seed, 100).unwrap();
        let f2 = kmeans_fit(&rev, 2, seed, 100).unwrap();
        assert_eq!(f1.assignment, f2.assignment, "seed {seed}");
        assert_eq!(f1.centroids, f2.centroids, "seed {seed}");
        assert_eq!(f1.sse, f2.sse, "seed {seed}");
    }
}

#[test]
fn multi_k_uses_per_k_seeds_and_covers_every_word() {
    let table = four_points();
    let model = kmeans_multi(&table, &[2, 3], 42).unwrap();
    assert_eq!(model.per_k.len(), 2);
    for (&k, fit) in &model.per_k {
        assert_eq!(fit.assignment.len(), 4);
        for &c in fit.assignment.values() {
            assert!(c < k);
        }
        let single = kmeans_fit(&table, k, 42 + k as u64, 100).unwrap();
        assert_eq!(fit.assignment, single.assignment);
    }
    assert!(kmeans_multi(&table, &[], 42).is_err());
}
