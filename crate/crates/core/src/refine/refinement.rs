use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::divergence::{identify_divergent_features, DivergentFeature};
use super::generator::{fit_generator, GeneratorSpec};
use crate::dataset::Table;
use crate::error::StageExt;
use crate::metrics::{AuditConfig, AuditOutcome, Auditor};
use crate::seed::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    /// Stop once the distance is at or below this value.
    pub epsilon: f64,
    pub max_iters: usize,
    pub top_k: usize,
    /// Emphasis increment for each divergent feature, clamped to 1.
    pub delta: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iters: 8,
            top_k: 3,
            delta: 0.25,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(String::from(m)));
        if self.epsilon.is_nan() {
            return bad("epsilon must be a number");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub d_shap: f64,
    pub divergent_features: Vec<DivergentFeature>,
    pub generator_spec_digest: String,
    pub sample_seed: u64,
    /// Emphasis in force for this iteration, by column name.
    pub emphasis: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTrace {
    pub iterations: Vec<IterationRecord>,
    pub best_iteration: usize,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl RefinementTrace {
    pub fn best(&self) -> Option<&IterationRecord> {
        self.iterations.get(self.best_iteration)
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub best_syn: Table,
    pub best: AuditOutcome,
    pub trace: RefinementTrace,
}

/// A failed refinement together with the iterations completed before it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} (after {} completed iterations)", trace.iterations.len())]
pub struct RefineError {
    pub error: Error,
    pub trace: RefinementTrace,
}

/// Column of `real` that a transformed feature name came from: the name
/// itself, or the longest `column=` prefix of a one-hot indicator.
fn source_column(real: &Table, feature: &str) -> Option<String> {
    if real.column_index(feature).is_some() {
        return Some(String::from(feature));
    }
    feature
        .char_indices()
        .rev()
        .filter(|&(_, c)| c == '=')
        .map(|(i, _)| &feature[..i])
        .find(|prefix| real.column_index(prefix).is_some())
        .map(String::from)
}

pub fn refine_loop(
    real: &Table,
    spec: &GeneratorSpec,
    config: &RefineConfig,
    audit_config: &AuditConfig,
) -> core::result::Result<RefineOutcome, RefineError> {
    let mut trace = RefinementTrace {
        iterations: Vec::new(),
        best_iteration: 0,
        epsilon: config.epsilon,
        max_iters: config.max_iters,
    };
    let fail = |error: Error, trace: &RefinementTrace| RefineError {
        error,
        trace: trace.clone(),
    };
    config.validate().stage("config").map_err(|e| fail(e, &trace))?;
    spec.validate().stage("config").map_err(|e| fail(e, &trace))?;
    let auditor = Auditor::new(real, audit_config).map_err(|e| fail(e, &trace))?;

    let mut current = spec.clone();
    let mut best: Option<(f64, Table, AuditOutcome)> = None;
    for t in 0..config.max_iters {
        let sample_seed = derive_seed(spec.seed, &format!("refine/sample/{t}"));
        current.seed = sample_seed;
        let step = || -> Result<(Table, AuditOutcome, Vec<DivergentFeature>)> {
            let generator = fit_generator(real, &current).stage("generate")?;
            let syn = generator.sample(current.sample_count, sample_seed).stage("generate")?;
            let outcome = auditor.evaluate(&syn)?;
            let phi_syn = crate::attribution::GlobalAttributionVector {
                phi: outcome.report.attribution.phi_syn.clone(),
                aggregation: outcome.report.attribution.aggregation,
                feature_names: outcome.report.attribution.feature_names.clone(),
            };
            let divergent = identify_divergent_features(auditor.phi_real(), &phi_syn, config.top_k).stage("divergence")?;
            Ok((syn, outcome, divergent))
        };
        let (syn, outcome, divergent) = step().map_err(|e| fail(e, &trace))?;
        let d_shap = outcome.report.shap_distance;
        trace.iterations.push(IterationRecord {
            t,
            d_shap,
            divergent_features: divergent.clone(),
            generator_spec_digest: current.digest(),
            sample_seed,
            emphasis: current.emphasis.iter().map(|(k, &v)| (k.clone(), v)).collect(),
        });
        if best.as_ref().is_none_or(|(d, ..)| d_shap < *d) {
            trace.best_iteration = t;
            best = Some((d_shap, syn, outcome));
        }
        if d_shap <= config.epsilon {
            break;
        }
        for f in &divergent {
            if let Some(column) = source_column(real, &f.name) {
                let w = current.emphasis.entry(column).or_insert(0.0);
                *w = (*w + config.delta).min(1.0);
            }
        }
    }
    let (_, best_syn, best) = best.expect("max_iters >= 1 and every iteration either succeeds or returns");
    Ok(RefineOutcome { best_syn, best, trace })
}
