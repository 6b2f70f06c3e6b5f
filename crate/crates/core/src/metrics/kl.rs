//! Histogram KL divergence between a real and a synthetic column.
//!
//! Both columns share one binning: equal-width bins over the union range for
//! numeric columns, one bin per category for coded columns. Each histogram is
//! ε-smoothed and renormalised, then `Σ p ln(p/q)` is returned in nats with
//! the real column as `p`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{ColumnData, MISSING_CODE};
use crate::math::{floor, ln};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlConfig {
    pub bins: usize,
    pub epsilon: f64,
}

impl Default for KlConfig {
    fn default() -> Self {
        Self {
            bins: 32,
            epsilon: 1e-9,
        }
    }
}

fn smoothed(counts: &[f64], epsilon: f64) -> Vec<f64> {
    let n: f64 = counts.iter().sum();
    let raw: Vec<f64> = counts.iter().map(|c| c / n + epsilon).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

/// KL divergence of two histograms over the same bins.
pub fn kl_from_counts(p_counts: &[f64], q_counts: &[f64], epsilon: f64) -> Result<f64> {
    if p_counts.len() != q_counts.len() {
        return Err(Error::LengthMismatch(p_counts.len(), q_counts.len()));
    }
    let p = smoothed(p_counts, epsilon);
    let q = smoothed(q_counts, epsilon);
    let kl: f64 = p.iter().zip(&q).map(|(&pi, &qi)| if pi == qi { 0.0 } else { pi * ln(pi / qi) }).sum();
    Ok(kl.max(0.0))
}

/// Equal-width bin edges over the union range, or `None` when the range
/// has zero width.
pub fn shared_edges(real: &[f64], syn: &[f64], bins: usize) -> Option<Vec<f64>> {
    let (lo, hi) = real
        .iter()
        .chain(syn)
        .filter(|x| !x.is_nan())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return None;
    }
    let width = (hi - lo) / bins as f64;
    Some((0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect())
}

/// Counts of `values` over `edges`; the last bin is closed on the right.
pub fn bin_counts(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = (edges[bins] - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &x in values.iter().filter(|x| !x.is_nan()) {
        let idx = floor((x - lo) / width);
        let idx = if idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
        counts[idx] += 1.0;
    }
    counts
}

pub fn kl_divergence(real: &[f64], syn: &[f64], config: &KlConfig) -> Result<f64> {
    if real.is_empty() || syn.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    if config.bins == 0 {
        return Err(Error::InvalidParameter(alloc::string::String::from("kl bins must be positive")));
    }
    let Some(edges) = shared_edges(real, syn, config.bins) else {
        return Ok(0.0);
    };
    kl_from_counts(&bin_counts(real, &edges), &bin_counts(syn, &edges), config.epsilon)
}

/// Per-category counts over the union of observed codes, in code order.
pub fn category_counts(real: &[u32], syn: &[u32]) -> (Vec<u32>, Vec<f64>, Vec<f64>) {
    let mut table: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for &c in real.iter().filter(|&&c| c != MISSING_CODE) {
        table.entry(c).or_default().0 += 1.0;
    }
    for &c in syn.iter().filter(|&&c| c != MISSING_CODE) {
        table.entry(c).or_default().1 += 1.0;
    }
    let codes = table.keys().copied().collect();
    let (p, q) = table.values().copied().unzip();
    (codes, p, q)
}

pub fn kl_divergence_categorical(real: &[u32], syn: &[u32], epsilon: f64) -> Result<f64> {
    if real.is_empty() || syn.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let (_, p, q) = category_counts(real, syn);
    kl_from_counts(&p, &q, epsilon)
}

/// Dispatches on column storage. Both columns must come from the same
/// fitted transform so that category codes agree.
pub fn column_kl(real: &ColumnData, syn: &ColumnData, config: &KlConfig) -> Result<f64> {
    match (real, syn) {
        (ColumnData::Numeric(a), ColumnData::Numeric(b)) => kl_divergence(a, b, config),
        (ColumnData::Coded { codes: a, .. }, ColumnData::Coded { codes: b, .. }) => {
            kl_divergence_categorical(a, b, config.epsilon)
        }
        _ => Err(Error::FeatureMismatch(alloc::string::String::from(
            "real and synthetic columns have different storage",
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_columns_give_zero() {
        let v = [1.0, 2.0, 2.5, 9.0, -3.0];
        assert_eq!(kl_divergence(&v, &v, &KlConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn two_bin_reference_value() {
        // 0.5 ln 2 + 0.5 ln(2/3)
        let kl = kl_from_counts(&[1.0, 1.0], &[1.0, 3.0], 1e-9).unwrap();
        let expected = 0.5 * core::f64::consts::LN_2 + 0.5 * libm::log(2.0 / 3.0);
        assert!((expected - 0.143_841_036).abs() < 1e-9);
        assert!((kl - 0.14384).abs() < 1e-4);
        let via_codes = kl_divergence_categorical(&[0, 1], &[0, 1, 1, 1], 1e-9).unwrap();
        assert_eq!(kl, via_codes);
    }

    #[test]
    fn matched_binary_frequencies_are_near_zero() {
        let real: Vec<u32> = (0..1000).map(|i| u32::from(i % 6 == 0)).collect();
        let syn: Vec<u32> = (0..600).map(|i| u32::from(i % 6 == 3)).collect();
        assert!(kl_divergence_categorical(&real, &syn, 1e-9).unwrap() < 1e-6);
    }

    #[test]
    fn constant_equal_columns_return_zero() {
        assert_eq!(kl_divergence(&[4.0, 4.0], &[4.0], &KlConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn empty_column_is_an_error() {
        assert!(kl_divergence(&[], &[1.0], &KlConfig::default()).is_err());
    }

    #[test]
    fn asymmetric() {
        let a = [1.0, 1.0, 3.0];
        let b = [1.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        let cfg = KlConfig { bins: 2, epsilon: 1e-9 };
        let ab = kl_divergence(&a, &b, &cfg).unwrap();
        let ba = kl_divergence(&b, &a, &cfg).unwrap();
        assert!(ab > 0.0 && ba > 0.0);
        assert!((ab - ba).abs() > 1e-3);
    }

    #[test]
    fn max_lands_in_last_bin() {
        let edges = shared_edges(&[0.0, 10.0], &[5.0], 4).unwrap();
        assert_eq!(bin_counts(&[0.0, 10.0, 5.0, 2.5], &edges), vec![1.0, 1.0, 1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn non_negative(a in proptest::collection::vec(-100.0f64..100.0, 1..60),
                        b in proptest::collection::vec(-100.0f64..100.0, 1..60)) {
            let cfg = KlConfig::default();
            prop_assert!(kl_divergence(&a, &b, &cfg).unwrap() >= 0.0);
            prop_assert!(kl_divergence(&a, &a, &cfg).unwrap() <= 1e-12);
        }
    }
}
