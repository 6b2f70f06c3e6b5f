//! Shapley values by explicit enumeration of all `2^d` coalitions.
//!
//! Uses the same cover-weighted value function as TreeSHAP but none of its
//! machinery, so the two can check each other.

use alloc::vec::Vec;

use crate::math::ExtSum;
use crate::model::TreeEnsemble;
use crate::{Error, Result};

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// `v(S)` for the coalition encoded by the bits of `mask`, in margin units.
pub fn coalition_value(model: &TreeEnsemble, row: &[f64], mask: u64) -> f64 {
    let known = |f: usize| (mask >> f) & 1 == 1;
    let mut sum = ExtSum::new();
    for tree in &model.trees {
        sum.add(tree.conditional_expectation(row, &known));
    }
    model.base_score + model.learning_rate * sum.value()
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `φ_k = Σ_{S ⊆ F∖{k}} |S|!(d−|S|−1)!/d! · (v(S∪{k}) − v(S))`.
pub fn brute_force_shapley(model: &TreeEnsemble, row: &[f64]) -> Result<Vec<f64>> {
    let d = model.feature_count();
    if d > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyFeatures {
            found: d,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if row.len() != d {
        return Err(Error::RowLength {
            expected: d,
            found: row.len(),
        });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let values: Vec<f64> = (0..1u64 << d).map(|m| coalition_value(model, row, m)).collect();
    // |S|!(d-|S|-1)!/d! = 1 / (d · C(d-1, |S|))
    let weights: Vec<f64> = (0..d as u64)
        .map(|s| 1.0 / (d as f64 * binomial(d as u64 - 1, s) as f64))
        .collect();

    Ok((0..d)
        .map(|k| {
            let bit = 1u64 << k;
            let mut acc = ExtSum::new();
            for mask in (0..1u64 << d).filter(|m| m & bit == 0) {
                let s = mask.count_ones() as usize;
                let marginal = values[(mask | bit) as usize] - values[mask as usize];
                acc.add_product(weights[s], marginal);
            }
            acc.value()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Tree, TreeNode};
    use alloc::format;
    use alloc::vec;

    fn split(feature: usize, left: usize, right: usize, cover: u64) -> TreeNode {
        TreeNode::Internal {
            feature_index: feature,
            threshold: 0.5,
            left,
            right,
            cover,
        }
    }

    fn leaf(value: f64, cover: u64) -> TreeNode {
        TreeNode::Leaf { value, cover }
    }

    fn model(trees: Vec<Tree>, d: usize) -> TreeEnsemble {
        TreeEnsemble {
            trees,
            base_score: 0.0,
            learning_rate: 1.0,
            feature_names: (0..d).map(|i| format!("f{i}")).collect(),
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(19, 9), 92_378);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
    }

    #[test]
    fn stump_by_hand() {
        let t = Tree::new(vec![split(0, 1, 2, 2), leaf(-2.0, 1), leaf(2.0, 1)]).unwrap();
        let m = model(vec![t], 2);
        assert_eq!(coalition_value(&m, &[1.0, 0.0], 0b01), 2.0);
        assert_eq!(coalition_value(&m, &[1.0, 0.0], 0b00), 0.0);
        assert_eq!(brute_force_shapley(&m, &[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn symmetric_sum_model() {
        // f = x0 + x1 on {0,1}², built as a depth-2 tree with equal covers.
        let t = Tree::new(vec![
            split(0, 1, 2, 4),
            split(1, 3, 4, 2),
            split(1, 5, 6, 2),
            leaf(0.0, 1),
            leaf(1.0, 1),
            leaf(1.0, 1),
            leaf(2.0, 1),
        ])
        .unwrap();
        let m = model(vec![t], 3);
        let phi = brute_force_shapley(&m, &[1.0, 1.0, 7.0]).unwrap();
        assert_eq!(phi[0], phi[1]);
        assert_eq!(phi[0], 0.5);
        assert_eq!(phi[2], 0.0);
    }

    #[test]
    fn limit_and_row_length() {
        let m = model(vec![], 21);
        assert_eq!(
            brute_force_shapley(&m, &[0.0; 21]),
            Err(Error::TooManyFeatures { found: 21, limit: 20 })
        );
        let m = model(vec![], 2);
        assert!(matches!(brute_force_shapley(&m, &[0.0]), Err(Error::RowLength { .. })));
    }
}
