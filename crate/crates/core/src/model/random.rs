//! Random but structurally valid ensembles, for oracle checks.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::tree::{Tree, TreeEnsemble, TreeNode};
use crate::seed::rng;

#[derive(Debug, Clone, Copy)]
pub struct RandomEnsembleSpec {
    pub features: usize,
    pub max_depth: usize,
    pub trees: usize,
    /// Root cover; child covers are split uniformly at random.
    pub root_cover: u64,
}

/// Thresholds are drawn from `[-1, 1]`, leaf values from `[-2, 2]`.
pub fn random_ensemble(spec: &RandomEnsembleSpec, seed: u64) -> TreeEnsemble {
    let mut r = rng(seed);
    let trees = (0..spec.trees)
        .map(|_| {
            let mut nodes = Vec::new();
            grow(&mut r, spec, spec.root_cover.max(1), 0, &mut nodes);
            Tree { nodes }
        })
        .collect();
    TreeEnsemble {
        trees,
        base_score: r.random_range(-1.0..1.0),
        learning_rate: r.random_range(0.05..1.0),
        feature_names: (0..spec.features).map(|i| format!("f{i}")).collect(),
    }
}

fn grow(r: &mut impl Rng, spec: &RandomEnsembleSpec, cover: u64, depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
    let here = nodes.len();
    nodes.push(TreeNode::Leaf {
        value: r.random_range(-2.0..2.0),
        cover,
    });
    let split = depth < spec.max_depth && cover >= 2 && spec.features > 0 && (depth == 0 || r.random_bool(0.8));
    if split {
        let left_cover = r.random_range(1..cover);
        let feature_index = r.random_range(0..spec.features);
        let threshold = r.random_range(-1.0..1.0);
        let left = grow(r, spec, left_cover, depth + 1, nodes);
        let right = grow(r, spec, cover - left_cover, depth + 1, nodes);
        nodes[here] = TreeNode::Internal {
            feature_index,
            threshold,
            left,
            right,
            cover,
        };
    }
    here
}

/// Uniform rows in `[-1.5, 1.5]^d`.
pub fn random_rows(features: usize, rows: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..rows)
        .map(|_| (0..features).map(|_| r.random_range(-1.5..1.5)).collect())
        .collect()
}
