//! Input generators shared by the benchmarks.

use compcq_core::EmbeddingSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` random vectors of dimension `dim`, components uniform in `[-1, 1)`.
pub fn random_set(set_id: &str, n: usize, dim: usize, seed: u64) -> EmbeddingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n)
        .map(|i| {
            let v = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (format!("{set_id}-{i:03}"), v)
        })
        .collect();
    EmbeddingSet::new(set_id, "bench/random", dim, entries).expect("random vectors are valid")
}

pub const SAMPLE_CQS: [&str; 8] = [
    "What is an artist?",
    "Which recordings were released by the performer after 1990?",
    "How many visitors went to the national park last summer?",
    "Is the venue accessible to wheelchair users?",
    "What are the heterogeneous metadata sources used by the music archive?",
    "Which clinical trials recruited patients with treatment-resistant depression?",
    "Who curated the collection donated by the national museum?",
    "Where can tourists find crowded locations on rainy weekends?",
];
