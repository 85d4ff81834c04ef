//! Rank-based hypothesis tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest group size for which the rank-sum test uses the exact null.
pub const EXACT_RANK_SUM_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    KruskalWallis,
    WilcoxonRankSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// H for Kruskal-Wallis, the first sample's rank sum W for Wilcoxon.
    pub statistic: f64,
    /// Degrees of freedom (Kruskal-Wallis only).
    pub df: Option<usize>,
    pub p_value: f64,
    pub method: TestMethod,
}

/// Midranks (1-based) of `values`, plus the tie term sum(t^3 - t).
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

/// Kruskal-Wallis H with midrank tie correction; p from chi-square(k - 1).
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::Empty("need at least two groups"));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Empty("group"));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = pooled.len() as f64;
    let (ranks, ties) = midranks(&pooled);
    let df = groups.len() - 1;
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            df: Some(df),
            p_value: 1.0,
            method: TestMethod::KruskalWallis,
        });
    }
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(TestResult {
        statistic: h,
        df: Some(df),
        p_value: chi.sf(h).clamp(0.0, 1.0),
        method: TestMethod::KruskalWallis,
    })
}

/// Null distribution counts of the rank sum of `n` items drawn from ranks 1..=total.
fn rank_sum_counts(n: usize, total: usize) -> Vec<f64> {
    let max_sum = total * (total + 1) / 2;
    // ways[k][s]: subsets of size k with rank sum s
    let mut ways = vec![vec![0.0f64; max_sum + 1]; n + 1];
    ways[0][0] = 1.0;
    for r in 1..=total {
        for k in (1..=n.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                ways[k][s] += ways[k - 1][s - r];
            }
        }
    }
    ways.swap_remove(n)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test of `a` against `b`.
///
/// Without ties and with both samples of size at most
/// [`EXACT_RANK_SUM_MAX`] the p-value comes from the exact permutation
/// distribution; otherwise from the normal approximation with tie-corrected
/// variance and continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let w: f64 = ranks[..na].iter().sum();
    let n = (na + nb) as f64;

    let p_value = if ties == 0.0 && na.max(nb) <= EXACT_RANK_SUM_MAX {
        let counts = rank_sum_counts(na, na + nb);
        let total: f64 = counts.iter().sum();
        let w = w.round() as usize;
        let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
        let upper: f64 = counts[w..].iter().sum::<f64>() / total;
        (2.0 * lower.min(upper)).min(1.0)
    } else {
        let mean = na as f64 * (n + 1.0) / 2.0;
        let var = na as f64 * nb as f64 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
            let normal = Normal::standard();
            (2.0 * normal.sf(z)).min(1.0)
        }
    };
    Ok(TestResult {
        statistic: w,
        df: None,
        p_value,
        method: TestMethod::WilcoxonRankSum,
    })
}

/// Significance flags at family-wise level `alpha`: `p < alpha / m`.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let threshold = alpha / p_values.len().max(1) as f64;
    p_values.iter().map(|&p| p < threshold).collect()
}
