//! Path-dependent TreeSHAP.
//!
//! For each leaf the algorithm tracks, along the root-to-leaf path, the
//! fraction of coalitions in which each split feature is "one" (follows the
//! row) or "zero" (averaged by cover), and the Shapley-weighted count of
//! subsets of every size. Cost per tree is `O(leaves · depth²)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{FeatureMatrix, Table};
use crate::model::{Tree, TreeEnsemble, TreeNode};
use crate::Result;

/// Per-row, per-feature SHAP values in margin (log-odds) units.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMatrix {
    /// Row-major `n_rows × n_features`.
    pub values: Vec<f64>,
    pub n_rows: usize,
    pub n_features: usize,
    /// Expected margin with no feature known.
    pub base_value: f64,
    /// Index of each explained row in the table it came from.
    pub row_ids: Vec<usize>,
    pub feature_names: Vec<String>,
}

impl AttributionMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    /// `|base + Σφ − margin|`, maximised over rows of `x` (indexed by `row_ids`).
    pub fn max_local_accuracy_error(&self, model: &TreeEnsemble, x: &FeatureMatrix) -> f64 {
        (0..self.n_rows)
            .map(|i| {
                let sum: f64 = self.row(i).iter().sum();
                (self.base_value + sum - model.predict_margin(x.row(self.row_ids[i]))).abs()
            })
            .fold(0.0, f64::max)
    }
}

const NO_FEATURE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

impl Default for PathElement {
    fn default() -> Self {
        Self {
            feature: NO_FEATURE,
            zero_fraction: 0.0,
            one_fraction: 0.0,
            weight: 0.0,
        }
    }
}

fn extend_path(path: &mut [PathElement], depth: usize, zero: f64, one: f64, feature: usize) {
    path[depth] = PathElement {
        feature,
        zero_fraction: zero,
        one_fraction: one,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    };
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / d1;
        path[i].weight = zero * path[i].weight * (depth - i) as f64 / d1;
    }
}

fn unwind_path(path: &mut [PathElement], depth: usize, index: usize) {
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * d1 / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

/// Total weight of the path with element `index` removed, without mutating it.
fn unwound_sum(path: &[PathElement], depth: usize, index: usize) -> f64 {
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let mut total = 0.0;
    if one != 0.0 {
        let mut next_one = path[depth].weight;
        for i in (0..depth).rev() {
            let tmp = next_one / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64;
        }
    } else {
        for i in (0..depth).rev() {
            total += path[i].weight / (zero * (depth - i) as f64);
        }
    }
    total * (depth + 1) as f64
}

struct Walker<'a> {
    tree: &'a Tree,
    row: &'a [f64],
    phi: &'a mut [f64],
}

impl Walker<'_> {
    fn recurse(
        &mut self,
        node: usize,
        path: &mut [PathElement],
        depth: usize,
        zero: f64,
        one: f64,
        feature: usize,
    ) {
        extend_path(path, depth, zero, one, feature);
        match self.tree.nodes[node] {
            TreeNode::Leaf { value, .. } => {
                for i in 1..=depth {
                    let w = unwound_sum(path, depth, i);
                    let el = path[i];
                    self.phi[el.feature] += w * (el.one_fraction - el.zero_fraction) * value;
                }
            }
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
                cover,
            } => {
                let (hot, cold) = if self.row[feature_index] < threshold {
                    (left, right)
                } else {
                    (right, left)
                };
                let mut depth = depth;
                let mut incoming_zero = 1.0;
                let mut incoming_one = 1.0;
                if let Some(k) = (1..=depth).find(|&k| path[k].feature == feature_index) {
                    incoming_zero = path[k].zero_fraction;
                    incoming_one = path[k].one_fraction;
                    unwind_path(path, depth, k);
                    depth -= 1;
                }
                let cover = cover as f64;
                let hot_zero = self.tree.nodes[hot].cover() as f64 / cover;
                let cold_zero = self.tree.nodes[cold].cover() as f64 / cover;

                let (current, child) = path.split_at_mut(depth + 1);
                child[..=depth].copy_from_slice(current);
                self.recurse(hot, child, depth + 1, hot_zero * incoming_zero, incoming_one, feature_index);
                child[..=depth].copy_from_slice(current);
                self.recurse(cold, child, depth + 1, cold_zero * incoming_zero, 0.0, feature_index);
            }
        }
    }
}

/// Adds one tree's SHAP values for `row` into `phi` (unscaled by learning rate).
fn tree_contributions(tree: &Tree, row: &[f64], phi: &mut [f64], scratch: &mut Vec<PathElement>) {
    let d = tree.depth() + 2;
    let need = (d + 1) * (d + 2) / 2;
    if scratch.len() < need {
        scratch.resize(need, PathElement::default());
    }
    let mut walker = Walker { tree, row, phi };
    walker.recurse(0, scratch, 0, 1.0, 1.0, NO_FEATURE);
}

/// SHAP values of one row for the whole ensemble.
pub fn tree_shap_row(model: &TreeEnsemble, row: &[f64]) -> Vec<f64> {
    let d = model.feature_count();
    let mut phi = vec![0.0; d];
    let mut per_tree = vec![0.0; d];
    let mut scratch = Vec::new();
    for tree in &model.trees {
        per_tree.fill(0.0);
        tree_contributions(tree, row, &mut per_tree, &mut scratch);
        for (p, t) in phi.iter_mut().zip(&per_tree) {
            *p += model.learning_rate * t;
        }
    }
    phi
}

/// Explains the rows of `x` listed in `row_ids` (all rows when `None`).
pub fn tree_shap_matrix(model: &TreeEnsemble, x: &FeatureMatrix, row_ids: Option<&[usize]>) -> AttributionMatrix {
    let ids: Vec<usize> = match row_ids {
        Some(ids) => ids.to_vec(),
        None => (0..x.rows).collect(),
    };
    let d = model.feature_count();
    let mut values = Vec::with_capacity(ids.len() * d);
    for &i in &ids {
        values.extend(tree_shap_row(model, x.row(i)));
    }
    AttributionMatrix {
        values,
        n_rows: ids.len(),
        n_features: d,
        base_value: model.expected_margin(),
        row_ids: ids,
        feature_names: model.feature_names.clone(),
    }
}

pub fn tree_shap(model: &TreeEnsemble, rows: &Table) -> Result<AttributionMatrix> {
    model.check_features(rows)?;
    let x = rows.feature_matrix()?;
    Ok(tree_shap_matrix(model, &x, None))
}
