//! Deterministic gradient-boosted classification trees.

pub mod random;
mod train;
mod tree;

pub use train::{train, train_matrix, training_loss, TrainConfig};
pub use tree::{accuracy, Tree, TreeEnsemble, TreeNode};
