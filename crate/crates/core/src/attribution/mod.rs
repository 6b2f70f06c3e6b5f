//! Exact SHAP attributions for tree ensembles and their global aggregation.

mod brute_force;
mod global;
mod treeshap;

pub use brute_force::{brute_force_shapley, coalition_value, BRUTE_FORCE_LIMIT};
pub use global::{
    attribution_rows_for_audit, global_attribution, select_explain_rows, Aggregation,
    GlobalAttributionVector,
};
pub use treeshap::{tree_shap, tree_shap_matrix, tree_shap_row, AttributionMatrix};
