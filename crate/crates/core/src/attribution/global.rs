use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;

use super::treeshap::{tree_shap_matrix, AttributionMatrix};
use crate::dataset::Table;
use crate::model::TreeEnsemble;
use crate::seed::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    MeanAbs,
    MeanSigned,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::MeanAbs => "mean_abs",
            Aggregation::MeanSigned => "mean_signed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mean_abs" => Some(Aggregation::MeanAbs),
            "mean_signed" => Some(Aggregation::MeanSigned),
            _ => None,
        }
    }
}

/// Per-feature aggregate of an attribution matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAttributionVector {
    pub phi: Vec<f64>,
    pub aggregation: Aggregation,
    pub feature_names: Vec<String>,
}

impl GlobalAttributionVector {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

pub fn global_attribution(m: &AttributionMatrix, aggregation: Aggregation) -> Result<GlobalAttributionVector> {
    if m.n_rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut phi = alloc::vec![0.0; m.n_features];
    for i in 0..m.n_rows {
        for (acc, &v) in phi.iter_mut().zip(m.row(i)) {
            *acc += match aggregation {
                Aggregation::MeanAbs => v.abs(),
                Aggregation::MeanSigned => v,
            };
        }
    }
    let n = m.n_rows as f64;
    phi.iter_mut().for_each(|p| *p /= n);
    Ok(GlobalAttributionVector {
        phi,
        aggregation,
        feature_names: m.feature_names.clone(),
    })
}

/// Rows to explain: all of them when `n <= cap`, otherwise a seeded sample
/// of `cap` distinct rows. Always ascending.
pub fn select_explain_rows(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut r = rng(seed);
    let mut rows = index::sample(&mut r, n, cap).into_vec();
    rows.sort_unstable();
    rows
}

/// Explains `model` on (a capped, seeded subset of) the real holdout rows.
/// Both audit models go through this with the same rows and seed.
pub fn attribution_rows_for_audit(
    model: &TreeEnsemble,
    real_test: &Table,
    max_explain_rows: usize,
    seed: u64,
) -> Result<AttributionMatrix> {
    if real_test.row_count() == 0 {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    model.check_features(real_test)?;
    let x = real_test.feature_matrix()?;
    let rows = select_explain_rows(x.rows, max_explain_rows, seed);
    Ok(tree_shap_matrix(model, &x, Some(&rows)))
}
