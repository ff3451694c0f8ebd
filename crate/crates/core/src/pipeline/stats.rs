use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest sample size tested against the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

/// Two-sided Wilcoxon signed-rank test result. `statistic` is the smaller
/// of the positive and negative rank sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    pub statistic: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub method: WilcoxonMethod,
}

/// Mid-ranks of `values` (ascending), doubled so they stay integral.
fn doubled_mid_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j averaged, times two
        let doubled = (i + 1 + j) as u64;
        for &k in &order[i..j] {
            ranks[k] = doubled;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// Wilcoxon signed-rank test on paired samples `(a, b)` with differences
/// `a - b`. Zero differences are dropped and tied magnitudes get mid-ranks.
/// Up to [`EXACT_MAX_N`] pairs the p-value comes from the exact null
/// distribution of the (mid-)rank sums, beyond that from the normal
/// approximation with tie and continuity corrections.
///
/// Returns `None` when every pair is tied: the test is undefined.
pub fn wilcoxon_signed_rank(paired: &[(f64, f64)]) -> Option<Wilcoxon> {
    let diffs: Vec<f64> = paired
        .iter()
        .map(|&(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return None;
    }
    if n < 6 {
        log::warn!("wilcoxon test on {n} non-tied pairs cannot reach p < 0.05");
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = doubled_mid_ranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let plus: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let low = plus.min(total - plus);
    let statistic = low as f64 / 2.0;

    if n <= EXACT_MAX_N {
        // counts[s]: sign assignments whose doubled positive rank sum is s
        let mut counts = vec![0f64; total as usize + 1];
        counts[0] = 1.0;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] != 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let tail: f64 = counts[..=low as usize].iter().sum();
        let p = (2.0 * tail / 2f64.powi(n as i32)).min(1.0);
        return Some(Wilcoxon {
            statistic,
            p_value: p,
            n,
            method: WilcoxonMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term).sqrt();
    let z = ((statistic - mean).abs() - 0.5).max(0.0) / sd;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Some(Wilcoxon {
        statistic,
        p_value: (2.0 * normal.cdf(-z)).min(1.0),
        n,
        method: WilcoxonMethod::Normal,
    })
}

/// Median of `values`; the mean of the middle two for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}
