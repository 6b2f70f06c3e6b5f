use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::Table;
use crate::math::sigmoid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Rows with `value < threshold` go left.
    Internal {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
        cover: u64,
    },
    Leaf { value: f64, cover: u64 },
}

impl TreeNode {
    pub fn cover(&self) -> u64 {
        match *self {
            TreeNode::Internal { cover, .. } | TreeNode::Leaf { cover, .. } => cover,
        }
    }
}

/// A binary tree stored as a flat node array with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn new(nodes: Vec<TreeNode>) -> Result<Self> {
        let tree = Tree { nodes };
        tree.validate()?;
        Ok(tree)
    }

    pub fn leaf(value: f64, cover: u64) -> Self {
        Tree {
            nodes: alloc::vec![TreeNode::Leaf { value, cover }],
        }
    }

    /// Checks child indices, acyclicity, `cover >= 1` and
    /// `cover(parent) = cover(left) + cover(right)`.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidTree(String::from("no nodes")));
        }
        let mut seen = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![0usize];
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(Error::InvalidTree(format!("node {i} reached twice")));
            }
            seen[i] = true;
            let node = &self.nodes[i];
            if node.cover() == 0 {
                return Err(Error::InvalidTree(format!("node {i} has zero cover")));
            }
            if let TreeNode::Internal { left, right, cover, .. } = *node {
                if left >= self.nodes.len() || right >= self.nodes.len() {
                    return Err(Error::InvalidTree(format!("node {i} has a dangling child")));
                }
                if self.nodes[left].cover() + self.nodes[right].cover() != cover {
                    return Err(Error::InvalidTree(format!("node {i} cover mismatch")));
                }
                stack.push(right);
                stack.push(left);
            }
        }
        Ok(())
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { .. } => return i,
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[feature_index] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            TreeNode::Leaf { value, .. } => value,
            TreeNode::Internal { .. } => unreachable!(),
        }
    }

    /// Path-dependent conditional expectation: features for which `known`
    /// returns true follow the row, all others average both children by cover.
    pub fn conditional_expectation(&self, row: &[f64], known: &dyn Fn(usize) -> bool) -> f64 {
        self.expect_from(0, row, known)
    }

    fn expect_from(&self, i: usize, row: &[f64], known: &dyn Fn(usize) -> bool) -> f64 {
        match self.nodes[i] {
            TreeNode::Leaf { value, .. } => value,
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
                cover,
            } => {
                if known(feature_index) {
                    let next = if row[feature_index] < threshold { left } else { right };
                    self.expect_from(next, row, known)
                } else {
                    let wl = self.nodes[left].cover() as f64;
                    let wr = self.nodes[right].cover() as f64;
                    (wl * self.expect_from(left, row, known) + wr * self.expect_from(right, row, known))
                        / cover as f64
                }
            }
        }
    }

    /// Cover-weighted mean leaf value.
    pub fn expected_value(&self) -> f64 {
        self.conditional_expectation(&[], &|_| false)
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn uses_feature(&self, feature: usize) -> bool {
        self.nodes.iter().any(
            |n| matches!(n, TreeNode::Internal { feature_index, .. } if *feature_index == feature),
        )
    }
}

/// Additive ensemble: `margin = base_score + learning_rate · Σ tree(row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub trees: Vec<Tree>,
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.feature_count();
        for tree in &self.trees {
            tree.validate()?;
            for node in &tree.nodes {
                if let TreeNode::Internal { feature_index, .. } = *node {
                    if feature_index >= d {
                        return Err(Error::InvalidTree(format!(
                            "feature index {feature_index} out of range for {d} features"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn predict_margin(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.predict_margin(row))
    }

    /// `base_score + learning_rate · Σ E[tree]`: the margin with no feature known.
    pub fn expected_margin(&self) -> f64 {
        let sum: f64 = self.trees.iter().map(Tree::expected_value).sum();
        self.base_score + self.learning_rate * sum
    }

    /// Checks that `table`'s features are exactly this model's, in order.
    pub fn check_features(&self, table: &Table) -> Result<()> {
        let names = table.feature_names();
        if names != self.feature_names {
            return Err(Error::FeatureMismatch(format!(
                "table features {:?} differ from model features {:?}",
                names, self.feature_names
            )));
        }
        Ok(())
    }
}

/// Fraction of rows whose thresholded probability (`>= 0.5` is class 1)
/// matches the target.
pub fn accuracy(model: &TreeEnsemble, test: &Table) -> Result<f64> {
    if test.row_count() == 0 {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    model.check_features(test)?;
    let x = test.feature_matrix()?;
    let y = test.target_labels()?;
    let correct = (0..x.rows)
        .filter(|&i| u8::from(model.predict_proba(x.row(i)) >= 0.5) == y[i])
        .count();
    Ok(correct as f64 / x.rows as f64)
}
