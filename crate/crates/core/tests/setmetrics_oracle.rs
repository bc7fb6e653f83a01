mod support {
    pub mod oracle;
}

use compcq_core::embedding::EmbeddingSet;
use compcq_core::setmetrics::{acd, aps, centroid_similarity, compare, directional_coverage, kmeans};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle;

fn random_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn to_set(id: &str, vs: &[Vec<f64>]) -> EmbeddingSet {
    let entries = vs.iter().enumerate().map(|(i, v)| (format!("{id}-{i}"), v.clone())).collect();
    EmbeddingSet::new(id, "random", vs[0].len(), entries).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn metrics_match_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..60 {
        let dim = if case % 2 == 0 { 16 } else { 384 };
        let (na, nb) = (rng.random_range(2..=40), rng.random_range(1..=40));
        // Shift half the cases so cosine values spread across the threshold.
        let shift = if case % 4 < 2 { 0.0 } else { 0.8 };
        let mut a = random_vectors(&mut rng, na, dim);
        let mut b = random_vectors(&mut rng, nb, dim);
        for v in a.iter_mut().chain(b.iter_mut()) {
            v[0] += shift;
        }
        let (ea, eb) = (to_set("a", &a), to_set("b", &b));
        let tau = 0.1 + 0.8 * rng.random::<f64>();

        let got = aps(&ea).unwrap();
        let want = oracle::aps(&a);
        assert!(close(got.mean, want.0) && close(got.std, want.1));
        let got = acd(&ea).unwrap();
        let want = oracle::acd(&a);
        assert!(close(got.mean, want.0) && close(got.std, want.1));
        assert!(close(centroid_similarity(&ea, &eb).unwrap(), oracle::centroid_sim(&a, &b)));

        let got = directional_coverage(&ea, &eb, tau).unwrap();
        let (best, covered) = oracle::directional(&a, &b, tau);
        let (m, s) = oracle::mean_pstd(&best);
        assert!(close(got.mms.mean, m) && close(got.mms.std, s));
        let want_ids: Vec<String> = covered.iter().map(|i| format!("a-{i}")).collect();
        assert_eq!(got.covered_ids, want_ids);

        let r = compare(&ea, &eb, tau).unwrap();
        let (_, covered_b) = oracle::directional(&b, &a, tau);
        let pooled = 100.0 * (covered.len() + covered_b.len()) as f64 / (na + nb) as f64;
        assert!(close(r.bidirectional_pct, pooled));
        assert_eq!(compare(&eb, &ea, tau).unwrap().bidirectional_pct, r.bidirectional_pct);
    }
}

#[test]
fn two_blobs_split_cleanly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut vs = Vec::new();
    for center in [[10.0, 10.0, 0.0], [-10.0, -10.0, 5.0]] {
        for _ in 0..5 {
            vs.push(center.iter().map(|c| c + rng.random_range(-0.5..0.5)).collect::<Vec<f64>>());
        }
    }
    let e = to_set("blobs", &vs);
    for seed in 0..20 {
        let c = kmeans(&e, 2, seed).unwrap();
        assert!(c.assignment[..5].iter().all(|&x| x == c.assignment[0]));
        assert!(c.assignment[5..].iter().all(|&x| x == c.assignment[5]));
        assert_ne!(c.assignment[0], c.assignment[5]);
    }
}

#[test]
fn coverage_is_monotone_in_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = to_set("a", &random_vectors(&mut rng, 20, 16));
    let b = to_set("b", &random_vectors(&mut rng, 20, 16));
    let pcts: Vec<f64> = [0.1, 0.2, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|&t| directional_coverage(&a, &b, t).unwrap().covered_pct)
        .collect();
    assert!(pcts.windows(2).all(|w| w[0] >= w[1]), "{pcts:?}");
}
