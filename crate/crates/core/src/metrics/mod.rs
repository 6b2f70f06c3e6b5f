//! Fidelity metrics and the audit pipeline.

mod audit;
mod distance;
mod gaps;
mod kl;
mod moments;
mod pca;

pub use audit::{
    audit, AccuracySummary, AttributionSummary, AuditConfig, AuditOutcome, AuditReport, Auditor, PcaSummary, Provenance,
    RowCounts, UndersampleStage, DEFINITIONS, SEED_STAGES,
};
pub(crate) use distance::normalize_sum;
pub use distance::{cosine_distance, mean_abs_attribution_diff, shap_distance};
pub use gaps::{average_ranks, gaps_from_matrices, spearman, statistical_gaps, StatisticalGaps};
pub use kl::{
    bin_counts, category_counts, column_kl, kl_divergence, kl_divergence_categorical, kl_from_counts, shared_edges,
    KlConfig,
};
pub use pca::{pca_project, pca_variance_ratios, PcaBasis};
