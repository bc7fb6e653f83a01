//! Straightforward reimplementations of the set metrics used as test oracles.
//! Deliberately naive: explicit loops, two-pass variance, norms taken separately.

#![allow(dead_code, clippy::needless_range_loop)]

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    ab / (na.sqrt() * nb.sqrt())
}

pub fn mean_pstd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut m = 0.0;
    for x in xs {
        m += x;
    }
    m /= n;
    let mut v = 0.0;
    for x in xs {
        v += (x - m).powi(2);
    }
    (m, (v / n).sqrt())
}

pub fn mean_vec(vs: &[Vec<f64>]) -> Vec<f64> {
    let mut c = vec![0.0; vs[0].len()];
    for v in vs {
        for i in 0..c.len() {
            c[i] += v[i] / vs.len() as f64;
        }
    }
    c
}

pub fn aps(vs: &[Vec<f64>]) -> (f64, f64) {
    let mut s = Vec::new();
    for i in 0..vs.len() {
        for j in 0..vs.len() {
            if i < j {
                s.push(cos(&vs[i], &vs[j]));
            }
        }
    }
    mean_pstd(&s)
}

pub fn acd(vs: &[Vec<f64>]) -> (f64, f64) {
    let c = mean_vec(vs);
    let d: Vec<f64> = vs
        .iter()
        .map(|v| v.iter().zip(&c).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .collect();
    mean_pstd(&d)
}

/// Per-item best match of `a` in `b`, and the indices with best match >= tau.
pub fn directional(a: &[Vec<f64>], b: &[Vec<f64>], tau: f64) -> (Vec<f64>, Vec<usize>) {
    let mut best = vec![f64::MIN; a.len()];
    for i in 0..a.len() {
        for j in 0..b.len() {
            let s = cos(&a[i], &b[j]);
            if s > best[i] {
                best[i] = s;
            }
        }
    }
    let covered = (0..a.len()).filter(|&i| best[i] >= tau).collect();
    (best, covered)
}

pub fn centroid_sim(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    cos(&mean_vec(a), &mean_vec(b))
}
