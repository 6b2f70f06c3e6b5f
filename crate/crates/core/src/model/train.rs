use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::tree::{Tree, TreeEnsemble, TreeNode};
use crate::dataset::{FeatureMatrix, Table};
use crate::math::{ln, logistic_loss, sigmoid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub num_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Minimum number of training rows in each child of a split.
    pub min_child_cover: usize,
    /// L2 penalty on leaf values (the `λ` of the Newton step).
    pub l2_regularization: f64,
    /// Training is deterministic; the seed is recorded for provenance only.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_rounds: 100,
            max_depth: 4,
            learning_rate: 0.1,
            min_child_cover: 5,
            l2_regularization: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(String::from(what)));
        if self.num_rounds == 0 {
            return bad("num_rounds must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be a positive finite number");
        }
        if self.min_child_cover == 0 {
            return bad("min_child_cover must be positive");
        }
        if !(self.l2_regularization.is_finite() && self.l2_regularization >= 0.0) {
            return bad("l2_regularization must be a non-negative finite number");
        }
        Ok(())
    }
}

/// Boosts logistic-loss trees on `table`'s features and binary target.
///
/// Splits use exact greedy search over midpoints of consecutive distinct
/// values; equal gains keep the lower feature index, then the lower threshold.
pub fn train(table: &Table, config: &TrainConfig) -> Result<TreeEnsemble> {
    let y = table.target_labels()?;
    let x = table.feature_matrix()?;
    train_matrix(&x, &y, table.feature_names(), config)
}

pub fn train_matrix(
    x: &FeatureMatrix,
    y: &[u8],
    feature_names: Vec<String>,
    config: &TrainConfig,
) -> Result<TreeEnsemble> {
    config.validate()?;
    if x.cols == 0 || feature_names.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    if feature_names.len() != x.cols {
        return Err(Error::LengthMismatch(feature_names.len(), x.cols));
    }
    if y.len() != x.rows {
        return Err(Error::LengthMismatch(y.len(), x.rows));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    let negatives = y.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateTarget);
    }
    if positives < 2 || negatives < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: positives.min(negatives),
        });
    }
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "feature matrix contains non-finite values"
        )));
    }

    let prevalence = positives as f64 / y.len() as f64;
    let base_score = ln(prevalence / (1.0 - prevalence));
    let mut margins = vec![base_score; x.rows];
    let mut grad = vec![0.0; x.rows];
    let mut hess = vec![0.0; x.rows];
    let mut trees = Vec::with_capacity(config.num_rounds);

    for _round in 0..config.num_rounds {
        for i in 0..x.rows {
            let p = sigmoid(margins[i]);
            grad[i] = p - f64::from(y[i]);
            hess[i] = p * (1.0 - p);
        }
        let builder = Builder {
            x,
            grad: &grad,
            hess: &hess,
            config,
        };
        let mut nodes = Vec::new();
        let rows: Vec<usize> = (0..x.rows).collect();
        builder.grow(rows, 0, &mut nodes);
        let tree = Tree { nodes };
        for (i, m) in margins.iter_mut().enumerate() {
            *m += config.learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
    }

    Ok(TreeEnsemble {
        trees,
        base_score,
        learning_rate: config.learning_rate,
        feature_names,
    })
}

/// Mean logistic loss of `model` on `(x, y)`.
pub fn training_loss(model: &TreeEnsemble, x: &FeatureMatrix, y: &[u8]) -> f64 {
    let total: f64 = (0..x.rows)
        .map(|i| logistic_loss(model.predict_margin(x.row(i)), y[i]))
        .sum();
    total / x.rows as f64
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    grad: &'a [f64],
    hess: &'a [f64],
    config: &'a TrainConfig,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.config.l2_regularization)
    }

    /// Appends the subtree for `rows` (ascending) and returns its root index.
    fn grow(&self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
        let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        let cover = rows.len() as u64;
        let here = nodes.len();
        let leaf = TreeNode::Leaf {
            value: -g / (h + self.config.l2_regularization),
            cover,
        };
        nodes.push(leaf);

        if depth >= self.config.max_depth || rows.len() < 2 * self.config.min_child_cover {
            return here;
        }
        let Some(split) = self.best_split(&rows, g, h) else {
            return here;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) < split.threshold);
        let left = self.grow(left_rows, depth + 1, nodes);
        let right = self.grow(right_rows, depth + 1, nodes);
        nodes[here] = TreeNode::Internal {
            feature_index: split.feature,
            threshold: split.threshold,
            left,
            right,
            cover,
        };
        here
    }

    fn best_split(&self, rows: &[usize], g: f64, h: f64) -> Option<Split> {
        let parent = self.score(g, h);
        let min_cover = self.config.min_child_cover;
        let n = rows.len();
        let mut best: Option<Split> = None;
        let mut order = rows.to_vec();
        for f in 0..self.x.cols {
            order.sort_unstable_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for j in 0..n - 1 {
                let r = order[j];
                gl += self.grad[r];
                hl += self.hess[r];
                let lo = self.x.get(r, f);
                let hi = self.x.get(order[j + 1], f);
                if lo == hi || j + 1 < min_cover || n - j - 1 < min_cover {
                    continue;
                }
                let gain = self.score(gl, hl) + self.score(g - gl, h - hl) - parent;
                if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid > lo { mid } else { hi };
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
