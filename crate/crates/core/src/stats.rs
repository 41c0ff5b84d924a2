//! Nonparametric tests for method comparison.
//!
//! Mann-Whitney U uses exact enumeration for small samples (combined
//! n <= 16) and the tie-corrected normal approximation with continuity
//! correction otherwise. Kruskal-Wallis uses midranks with tie correction
//! and a chi-squared reference distribution. Ties always receive midranks.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Combined sample size at or below which Mann-Whitney p-values are exact.
pub const EXACT_ENUMERATION_LIMIT: usize = 16;

/// Result of one hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// `U` for Mann-Whitney, `H` for Kruskal-Wallis.
    pub statistic: f64,
    pub p: f64,
    /// `min(1, p * m)` after Bonferroni correction; equals `p` until a
    /// correction is applied.
    pub adjusted_p: f64,
    pub n_per_group: Vec<usize>,
}

impl TestResult {
    fn new(statistic: f64, p: f64, n_per_group: Vec<usize>) -> Self {
        TestResult {
            statistic,
            p,
            adjusted_p: p,
            n_per_group,
        }
    }

    /// Apply a Bonferroni correction for `m` comparisons.
    pub fn bonferroni_adjusted(mut self, m: usize) -> Self {
        self.adjusted_p = (self.p * m as f64).min(1.0);
        self
    }
}

/// Midranks of `values` (average rank across ties), 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j share the same value; their ranks average.
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

/// Tie-term `sum(t^3 - t)` over groups of tied values.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        term += t * t * t - t;
        i = j;
    }
    term
}

/// All rank sums of subsets of size `k`, by depth-first enumeration.
fn subset_rank_sums(ranks: &[f64], k: usize) -> Vec<f64> {
    fn recurse(ranks: &[f64], start: usize, remaining: usize, acc: f64, out: &mut Vec<f64>) {
        if remaining == 0 {
            out.push(acc);
            return;
        }
        // Not enough elements left to complete the subset.
        if ranks.len() - start < remaining {
            return;
        }
        recurse(ranks, start + 1, remaining - 1, acc + ranks[start], out);
        recurse(ranks, start + 1, remaining, acc, out);
    }
    let mut out = Vec::new();
    recurse(ranks, 0, k, 0.0, &mut out);
    out
}

/// Two-tailed Mann-Whitney U test. The statistic is `U` of `sample_a`.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<TestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::config("mann-whitney requires two non-empty samples".to_string()));
    }
    let (n1, n2) = (sample_a.len(), sample_b.len());
    let n = n1 + n2;
    let combined: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let ranks = midranks(&combined);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean = (n1 * n2) as f64 / 2.0;
    let observed_dev = (u1 - mean).abs();

    let p = if n <= EXACT_ENUMERATION_LIMIT {
        // Exact permutation distribution over all C(n, n1) labelings.
        let offset = (n1 * (n1 + 1)) as f64 / 2.0;
        let sums = subset_rank_sums(&ranks, n1);
        let total = sums.len() as f64;
        let extreme = sums
            .iter()
            .filter(|&&s| ((s - offset) - mean).abs() >= observed_dev - 1e-9)
            .count() as f64;
        extreme / total
    } else {
        let tie = tie_term(&combined);
        let nf = n as f64;
        let variance =
            (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie / (nf * (nf - 1.0)));
        if variance <= 0.0 {
            1.0
        } else {
            let z = (observed_dev - 0.5).max(0.0) / variance.sqrt();
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            (2.0 * (1.0 - normal.cdf(z))).min(1.0)
        }
    };

    Ok(TestResult::new(u1, p, vec![n1, n2]))
}

/// Kruskal-Wallis H test across `groups`, tie-corrected, with a chi-squared
/// approximation on k - 1 degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::config("kruskal-wallis requires at least two groups".to_string()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::config("kruskal-wallis groups must be non-empty".to_string()));
    }
    let combined: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = combined.len() as f64;
    let ranks = midranks(&combined);

    let mut h = 0.0;
    let mut offset = 0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        h += r * r / g.len() as f64;
        offset += g.len();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let correction = 1.0 - tie_term(&combined) / (n * n * n - n);
    let h = if correction <= 0.0 {
        0.0 // every observation identical
    } else {
        h / correction
    };

    let df = (groups.len() - 1) as f64;
    let p = if h <= 0.0 {
        1.0
    } else {
        let chi = ChiSquared::new(df).expect("df >= 1");
        (1.0 - chi.cdf(h)).clamp(0.0, 1.0)
    };

    Ok(TestResult::new(h, p, groups.iter().map(Vec::len).collect()))
}

/// Bonferroni correction: each p-value multiplied by the comparison count
/// and capped at 1.
pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    let m = p_values.len() as f64;
    p_values
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                Err(Error::config(format!("p-value {p} outside [0, 1]")))
            } else {
                Ok((p * m).min(1.0))
            }
        })
        .collect()
}
