//! Internal diversity of one embedding set and overlap between two sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{centroid, cosine, euclidean, EmbeddingSet};
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.70;
pub const DEFAULT_K: usize = 5;
pub const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> Result<MeanStd> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(MeanStd { mean, std: var.sqrt() })
}

/// Cosine similarity over all unordered pairs.
pub fn aps(e: &EmbeddingSet) -> Result<MeanStd> {
    let v = e.vectors();
    if v.len() < 2 {
        return Err(Error::InsufficientSet { needed: 2, found: v.len() });
    }
    let mut sims = Vec::with_capacity(v.len() * (v.len() - 1) / 2);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            sims.push(cosine(&v[i], &v[j])?);
        }
    }
    mean_std(&sims)
}

/// Euclidean distance of each vector to the (unnormalized) set centroid.
pub fn acd(e: &EmbeddingSet) -> Result<MeanStd> {
    if e.is_empty() {
        return Err(Error::InsufficientSet { needed: 1, found: 0 });
    }
    let c = centroid(e.vectors())?;
    let d: Vec<f64> = e.vectors().iter().map(|v| euclidean(v, &c)).collect();
    mean_std(&d)
}

/// Entropy in bits of the cluster-size distribution, with `0 log 0 = 0`.
pub fn shannon_entropy(sizes: &[usize]) -> Result<f64> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return Err(Error::Domain("cluster sizes sum to zero".into()));
    }
    let n = n as f64;
    let h: f64 = sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster index per input vector.
    pub assignment: Vec<usize>,
    /// Number of clusters actually used (`min(k, n)`).
    pub k: usize,
    pub requested_k: usize,
    pub iterations: usize,
    pub warning: Option<String>,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignment {
            s[a] += 1;
        }
        s
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(v: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(v, center);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn kmeans_pp_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            // Every point coincides with a chosen center.
            rng.random_range(0..points.len())
        };
        centers.push(points[idx].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    centers
}

/// Seeded k-means++ followed by Lloyd iterations until the assignment stops
/// changing (or [`KMEANS_MAX_ITER`]). Euclidean distance on raw vectors.
/// Empty clusters are reseeded with the point farthest from its center.
pub fn kmeans(e: &EmbeddingSet, k: usize, seed: u64) -> Result<Clustering> {
    kmeans_points(e.vectors(), k, seed)
}

pub fn kmeans_points(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InsufficientSet { needed: 1, found: 0 });
    }
    let n = points.len();
    let (k_used, warning) = if n < k {
        let w = format!("set has {n} vectors, fewer than k={k}; using k'={n}");
        log::warn!("{w}");
        (n, Some(w))
    } else {
        (k, None)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_pp_init(points, k_used, &mut rng);
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        repair_empty(points, &mut centers, &mut assignment);
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points.iter().zip(&assignment).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            *center = centroid(&members)?;
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    repair_empty(points, &mut centers, &mut assignment);
    Ok(Clustering {
        assignment,
        k: k_used,
        requested_k: k,
        iterations,
        warning,
    })
}

fn repair_empty(points: &[Vec<f64>], centers: &mut [Vec<f64>], assignment: &mut [usize]) {
    for c in 0..centers.len() {
        if assignment.contains(&c) {
            continue;
        }
        let mut sizes = vec![0usize; centers.len()];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        // Farthest point among those whose cluster can spare one.
        let far = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .max_by(|&i, &j| {
                sq_dist(&points[i], &centers[assignment[i]])
                    .total_cmp(&sq_dist(&points[j], &centers[assignment[j]]))
                    .then(j.cmp(&i))
            });
        if let Some(i) = far {
            assignment[i] = c;
            centers[c] = points[i].clone();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub set_id: String,
    pub n_cqs: usize,
    /// Absent for sets with fewer than two CQs.
    pub aps: Option<MeanStd>,
    pub acd: MeanStd,
    pub entropy: f64,
    pub k: usize,
    pub requested_k: usize,
    pub seed: u64,
    pub cluster_sizes: Vec<usize>,
    pub warning: Option<String>,
}

pub fn diversity(e: &EmbeddingSet, k: usize, seed: u64) -> Result<DiversityReport> {
    let cl = kmeans(e, k, seed)?;
    let sizes = cl.sizes();
    Ok(DiversityReport {
        set_id: e.set_id.clone(),
        n_cqs: e.len(),
        aps: if e.len() >= 2 { Some(aps(e)?) } else { None },
        acd: acd(e)?,
        entropy: shannon_entropy(&sizes)?,
        k: cl.k,
        requested_k: k,
        seed,
        cluster_sizes: sizes,
        warning: cl.warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalCoverage {
    /// Best cosine match in the other set, per item of this set.
    pub max_sims: Vec<f64>,
    pub mms: MeanStd,
    pub covered_count: usize,
    pub covered_pct: f64,
    pub novelty_pct: f64,
    pub covered_ids: Vec<String>,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must lie in (0, 1), got {tau}")))
    }
}

fn nonempty(e: &EmbeddingSet) -> Result<()> {
    if e.is_empty() {
        Err(Error::InsufficientSet { needed: 1, found: 0 })
    } else {
        Ok(())
    }
}

/// How much of `a` is matched in `b` at threshold `tau` (`s >= tau`).
pub fn directional_coverage(a: &EmbeddingSet, b: &EmbeddingSet, tau: f64) -> Result<DirectionalCoverage> {
    check_tau(tau)?;
    nonempty(a)?;
    nonempty(b)?;
    let mut max_sims = Vec::with_capacity(a.len());
    for va in a.vectors() {
        let mut best = f64::NEG_INFINITY;
        for vb in b.vectors() {
            best = best.max(cosine(va, vb)?);
        }
        max_sims.push(best);
    }
    let covered_ids: Vec<String> = a
        .ids()
        .iter()
        .zip(&max_sims)
        .filter(|(_, &s)| s >= tau)
        .map(|(id, _)| id.clone())
        .collect();
    let covered_count = covered_ids.len();
    let covered_pct = 100.0 * covered_count as f64 / a.len() as f64;
    Ok(DirectionalCoverage {
        mms: mean_std(&max_sims)?,
        max_sims,
        covered_count,
        covered_pct,
        novelty_pct: 100.0 - covered_pct,
        covered_ids,
    })
}

fn pooled_pct(cov_a: usize, n_a: usize, cov_b: usize, n_b: usize) -> f64 {
    100.0 * (cov_a + cov_b) as f64 / (n_a + n_b) as f64
}

pub fn bidirectional_coverage(a: &EmbeddingSet, b: &EmbeddingSet, tau: f64) -> Result<f64> {
    let ab = directional_coverage(a, b, tau)?;
    let ba = directional_coverage(b, a, tau)?;
    Ok(pooled_pct(ab.covered_count, a.len(), ba.covered_count, b.len()))
}

/// Cosine of the two raw centroids.
pub fn centroid_similarity(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64> {
    nonempty(a)?;
    nonempty(b)?;
    let ca = centroid(a.vectors())?;
    let cb = centroid(b.vectors())?;
    for (c, e) in [(&ca, a), (&cb, b)] {
        if c.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateSet(e.set_id.clone()));
        }
    }
    cosine(&ca, &cb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub set_a: String,
    pub set_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub centroid_sim: f64,
    /// Share of `set_a` matched in `set_b`.
    pub a_covered_pct: f64,
    pub b_covered_pct: f64,
    pub mms_a: MeanStd,
    pub mms_b: MeanStd,
    pub a_covered_ids: Vec<String>,
    pub b_covered_ids: Vec<String>,
    pub bidirectional_pct: f64,
    pub tau: f64,
}

impl PairwiseReport {
    pub fn swapped(&self) -> Self {
        Self {
            set_a: self.set_b.clone(),
            set_b: self.set_a.clone(),
            n_a: self.n_b,
            n_b: self.n_a,
            centroid_sim: self.centroid_sim,
            a_covered_pct: self.b_covered_pct,
            b_covered_pct: self.a_covered_pct,
            mms_a: self.mms_b,
            mms_b: self.mms_a,
            a_covered_ids: self.b_covered_ids.clone(),
            b_covered_ids: self.a_covered_ids.clone(),
            bidirectional_pct: self.bidirectional_pct,
            tau: self.tau,
        }
    }
}

pub fn compare(a: &EmbeddingSet, b: &EmbeddingSet, tau: f64) -> Result<PairwiseReport> {
    if a.dim != b.dim {
        return Err(Error::Dimension {
            id: b.set_id.clone(),
            expected: a.dim,
            found: b.dim,
        });
    }
    let ab = directional_coverage(a, b, tau)?;
    let ba = directional_coverage(b, a, tau)?;
    Ok(PairwiseReport {
        set_a: a.set_id.clone(),
        set_b: b.set_id.clone(),
        n_a: a.len(),
        n_b: b.len(),
        centroid_sim: centroid_similarity(a, b)?,
        a_covered_pct: ab.covered_pct,
        b_covered_pct: ba.covered_pct,
        mms_a: ab.mms,
        mms_b: ba.mms,
        bidirectional_pct: pooled_pct(ab.covered_count, a.len(), ba.covered_count, b.len()),
        a_covered_ids: ab.covered_ids,
        b_covered_ids: ba.covered_ids,
        tau,
    })
}
