//! Moment gaps between real and synthetic feature matrices.

use alloc::vec;
use alloc::vec::Vec;

use super::moments::{column_means, covariance};
use crate::dataset::{FeatureMatrix, Table};
use crate::math::sqrt;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalGaps {
    /// Mean over features of `|μ_real − μ_syn|`.
    pub mean_gap: f64,
    /// Mean over features of `|σ_real − σ_syn|` (sample standard deviations).
    pub std_gap: f64,
    /// Frobenius norm of the covariance difference.
    pub cov_gap: f64,
    /// Spearman correlation of the two per-feature mean vectors; `None`
    /// with fewer than two features or when either vector is constant.
    pub spearman: Option<f64>,
}

pub fn statistical_gaps(real: &Table, syn: &Table) -> Result<StatisticalGaps> {
    if real.feature_names() != syn.feature_names() {
        return Err(Error::FeatureMismatch(alloc::string::String::from(
            "real and synthetic feature sets differ",
        )));
    }
    gaps_from_matrices(&real.feature_matrix()?, &syn.feature_matrix()?)
}

pub fn gaps_from_matrices(real: &FeatureMatrix, syn: &FeatureMatrix) -> Result<StatisticalGaps> {
    if real.cols != syn.cols {
        return Err(Error::LengthMismatch(real.cols, syn.cols));
    }
    if real.cols == 0 {
        return Err(Error::EmptyFeatureSet);
    }
    for x in [real, syn] {
        if x.rows < 2 {
            return Err(Error::TooFewRows { needed: 2, found: x.rows });
        }
    }
    let d = real.cols;
    let (mr, ms) = (column_means(real), column_means(syn));
    let (cr, cs) = (covariance(real, &mr), covariance(syn, &ms));
    let mean_gap = mr.iter().zip(&ms).map(|(a, b)| (a - b).abs()).sum::<f64>() / d as f64;
    let std_gap = (0..d)
        .map(|j| (sqrt(cr[j * d + j]) - sqrt(cs[j * d + j])).abs())
        .sum::<f64>()
        / d as f64;
    let cov_gap = sqrt(cr.iter().zip(&cs).map(|(a, b)| (a - b) * (a - b)).sum());
    Ok(StatisticalGaps {
        mean_gap,
        std_gap,
        cov_gap,
        spearman: spearman(&mr, &ms),
    })
}

/// Ranks starting at 1, ties receive the average of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal_quantile;
    use crate::seed::rng;
    use rand::Rng;

    fn gaussian(n: usize, scale: f64, seed: u64) -> FeatureMatrix {
        let mut r = rng(seed);
        let data = (0..2 * n)
            .map(|_| scale * normal_quantile(r.random_range(1e-12..1.0 - 1e-12)))
            .collect();
        FeatureMatrix { data, rows: n, cols: 2 }
    }

    #[test]
    fn copy_has_zero_gaps() {
        let x = gaussian(200, 1.5, 1);
        let g = gaps_from_matrices(&x, &x).unwrap();
        assert_eq!((g.mean_gap, g.std_gap, g.cov_gap), (0.0, 0.0, 0.0));
        assert_eq!(g.spearman, Some(1.0));
    }

    #[test]
    fn reversed_means() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0], &[1.0]), None);
    }

    #[test]
    fn average_ranks_on_ties() {
        assert_eq!(average_ranks(&[5.0, 1.0, 5.0, 2.0]), alloc::vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn identity_vs_doubled_covariance() {
        let a = gaussian(10_000, 1.0, 11);
        let b = gaussian(10_000, core::f64::consts::SQRT_2, 12);
        let g = gaps_from_matrices(&a, &b).unwrap();
        assert!((g.cov_gap - core::f64::consts::SQRT_2).abs() <= 0.05, "{}", g.cov_gap);
    }

    #[test]
    fn mean_and_std_gap_by_hand() {
        let a = FeatureMatrix { data: alloc::vec![0.0, 0.0, 2.0, 4.0], rows: 2, cols: 2 };
        let b = FeatureMatrix { data: alloc::vec![1.0, 0.0, 3.0, 2.0], rows: 2, cols: 2 };
        let g = gaps_from_matrices(&a, &b).unwrap();
        // means (1,2) vs (2,1); sds (√2, 2√2) vs (√2, √2)
        assert_eq!(g.mean_gap, 1.0);
        assert!((g.std_gap - core::f64::consts::SQRT_2 / 2.0).abs() < 1e-12);
    }
}
