//! Tree ensembles as JSON. Reals are hexadecimal float strings so that a
//! reloaded model predicts bit-identically.

use serde::{Deserialize, Serialize};
use shapaudit_core::model::{Tree, TreeEnsemble, TreeNode};

use crate::hexfloat;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    feature_index: Option<usize>,
    threshold: Option<String>,
    left: Option<usize>,
    right: Option<usize>,
    value: Option<String>,
    cover: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    nodes: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    model_version: u32,
    base_score: String,
    learning_rate: String,
    feature_names: Vec<String>,
    trees: Vec<TreeJson>,
}

pub fn to_json(model: &TreeEnsemble) -> String {
    let doc = ModelJson {
        model_version: 1,
        base_score: hexfloat::format(model.base_score),
        learning_rate: hexfloat::format(model.learning_rate),
        feature_names: model.feature_names.clone(),
        trees: model
            .trees
            .iter()
            .map(|t| TreeJson {
                nodes: t
                    .nodes
                    .iter()
                    .map(|n| match *n {
                        TreeNode::Internal {
                            feature_index,
                            threshold,
                            left,
                            right,
                            cover,
                        } => NodeJson {
                            feature_index: Some(feature_index),
                            threshold: Some(hexfloat::format(threshold)),
                            left: Some(left),
                            right: Some(right),
                            value: None,
                            cover,
                        },
                        TreeNode::Leaf { value, cover } => NodeJson {
                            feature_index: None,
                            threshold: None,
                            left: None,
                            right: None,
                            value: Some(hexfloat::format(value)),
                            cover,
                        },
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<TreeEnsemble, String> {
    let doc: ModelJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.model_version != 1 {
        return Err(format!("unsupported model_version {}", doc.model_version));
    }
    let hex = |s: &str| hexfloat::parse(s).map_err(|e| e.to_string());
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (ti, t) in doc.trees.iter().enumerate() {
        let nodes = t
            .nodes
            .iter()
            .enumerate()
            .map(|(ni, n)| match (n.feature_index, &n.threshold, n.left, n.right, &n.value) {
                (Some(feature_index), Some(th), Some(left), Some(right), None) => Ok(TreeNode::Internal {
                    feature_index,
                    threshold: hex(th)?,
                    left,
                    right,
                    cover: n.cover,
                }),
                (None, None, None, None, Some(v)) => Ok(TreeNode::Leaf {
                    value: hex(v)?,
                    cover: n.cover,
                }),
                _ => Err(format!("tree {ti} node {ni} is neither a complete split nor a leaf")),
            })
            .collect::<Result<Vec<_>, String>>()?;
        trees.push(Tree::new(nodes).map_err(|e| format!("tree {ti}: {e}"))?);
    }
    let model = TreeEnsemble {
        trees,
        base_score: hex(&doc.base_score)?,
        learning_rate: hex(&doc.learning_rate)?,
        feature_names: doc.feature_names,
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}
