//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerical code: each oracle is the
//! most direct transcription of its definition.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: &[f64], scale: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |(_, j)| {
        let z: f64 = rng.sample(StandardNormal);
        shift[j] + scale[j] * z
    })
}

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in col..=n {
                        let sub = f * m[col][c];
                        m[r][c] -= sub;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n]).collect()
}

fn column_means(x: &Array2<f64>) -> Vec<f64> {
    (0..x.ncols())
        .map(|j| (0..x.nrows()).map(|i| x[[i, j]]).sum::<f64>() / x.nrows() as f64)
        .collect()
}

/// Direct shrinkage-LDA weights: ((1-l) S + l nu I)^-1 (mu_t - mu_nt).
pub fn rlda_weights(t: &Array2<f64>, nt: &Array2<f64>, lambda: f64) -> (Vec<f64>, f64) {
    let d = t.ncols();
    let (mt, mnt) = (column_means(t), column_means(nt));
    let n = (t.nrows() + nt.nrows()) as f64;
    let mut s = vec![vec![0.0; d]; d];
    for (x, m) in [(t, &mt), (nt, &mnt)] {
        for r in 0..x.nrows() {
            for i in 0..d {
                for j in 0..d {
                    s[i][j] += (x[[r, i]] - m[i]) * (x[[r, j]] - m[j]) / (n - 2.0);
                }
            }
        }
    }
    let nu = (0..d).map(|i| s[i][i]).sum::<f64>() / d as f64;
    let shrunk: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (1.0 - lambda) * s[i][j] + if i == j { lambda * nu } else { 0.0 })
                .collect()
        })
        .collect();
    let diff: Vec<f64> = mt.iter().zip(&mnt).map(|(a, b)| a - b).collect();
    let w = gauss_jordan_solve(&shrunk, &diff);
    let bias = -0.5 * (0..d).map(|i| w[i] * (mt[i] + mnt[i])).sum::<f64>();
    (w, bias)
}

/// Rank of each value by counting: #less + (#equal + 1) / 2.
pub fn count_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let less = values.iter().filter(|&&u| u < v).count() as f64;
            let equal = values.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Kruskal-Wallis H with the textbook tie correction.
pub fn kruskal_wallis_h(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let ranks = count_ranks(&all);
    let mean_rank = (n + 1.0) / 2.0;
    let mut between = 0.0;
    let mut k = 0;
    for g in groups {
        let rbar = ranks[k..k + g.len()].iter().sum::<f64>() / g.len() as f64;
        between += g.len() as f64 * (rbar - mean_rank).powi(2);
        k += g.len();
    }
    let h = 12.0 / (n * (n + 1.0)) * between;
    let mut seen: Vec<f64> = Vec::new();
    let mut tie_sum = 0.0;
    for &v in &all {
        if !seen.contains(&v) {
            seen.push(v);
            let t = all.iter().filter(|&&u| u == v).count() as f64;
            tie_sum += t * t * t - t;
        }
    }
    let c = 1.0 - tie_sum / (n * n * n - n);
    if c <= 0.0 {
        0.0
    } else {
        h / c
    }
}

/// Two-sided rank-sum p by enumerating every relabelling of the pooled sample.
pub fn exact_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = count_ranks(&pooled);
    let n = pooled.len();
    let observed: f64 = ranks[..a.len()].iter().sum();
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

/// Baseline-corrected copy of a (channels x samples) block.
pub fn brute_baseline(x: &Array2<f64>, base: usize) -> Array2<f64> {
    let mut out = x.clone();
    for c in 0..x.nrows() {
        let mut m = 0.0;
        for j in 0..base {
            m += x[[c, j]];
        }
        m /= base as f64;
        for j in 0..x.ncols() {
            out[[c, j]] = x[[c, j]] - m;
        }
    }
    out
}

/// Channel-major window means following the baseline.
pub fn brute_features(x: &Array2<f64>, base: usize, windows: usize) -> Vec<f64> {
    let width = (x.ncols() - base) / windows;
    let mut out = Vec::new();
    for c in 0..x.nrows() {
        for w in 0..windows {
            let mut s = 0.0;
            for k in 0..width {
                s += x[[c, base + w * width + k]];
            }
            out.push(s / width as f64);
        }
    }
    out
}

pub fn brute_l2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Counts of each rank sum of the first sample over all C(n+m, n) labellings
/// of the distinct ranks 1..=n+m.
pub fn enumerate_rank_sums(n: usize, m: usize) -> Vec<u64> {
    let total = n + m;
    let mut counts = vec![0u64; total * (total + 1) / 2 + 1];
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize == n {
            let w: usize = (0..total).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
            counts[w] += 1;
        }
    }
    counts
}

/// Two-sided p of rank sum `w` under an enumerated null distribution.
pub fn two_sided_p(counts: &[u64], w: usize) -> f64 {
    let total: u64 = counts.iter().sum();
    let le: u64 = counts[..=w].iter().sum();
    let ge: u64 = counts[w..].iter().sum();
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}
