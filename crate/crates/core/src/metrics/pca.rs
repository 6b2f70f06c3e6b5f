//! Principal components of the sample covariance.

use alloc::vec::Vec;

use super::moments::{column_means, covariance};
use crate::dataset::{FeatureMatrix, Table};
use crate::linalg::symmetric_eigen;
use crate::{Error, Result};

/// Eigenbasis of a table's covariance. Components are sorted by
/// eigenvalue, descending, and each is signed so that its largest-magnitude
/// entry is positive (first such entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub trace: f64,
}

impl PcaBasis {
    pub fn fit(x: &FeatureMatrix) -> Result<Self> {
        if x.cols < 2 {
            return Err(Error::TooFewColumns { needed: 2, found: x.cols });
        }
        if x.rows < 3 {
            return Err(Error::TooFewRows { needed: 3, found: x.rows });
        }
        let mean = column_means(x);
        let cov = covariance(x, &mean);
        let trace: f64 = (0..x.cols).map(|j| cov[j * x.cols + j]).sum();
        if !(trace > 0.0) {
            return Err(Error::ZeroTrace);
        }
        let eig = symmetric_eigen(&cov, x.cols);
        let components = (0..x.cols).map(|j| canonical_sign(eig.vector(j))).collect();
        Ok(Self {
            mean,
            eigenvalues: eig.values,
            components,
            trace,
        })
    }

    /// Explained variance ratio of every component. Tiny negative
    /// eigenvalues from round-off are reported as 0.
    pub fn ratios(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| l.max(0.0) / self.trace).collect()
    }

    /// Coordinates of every row of `x` on the first `k` components.
    pub fn project(&self, x: &FeatureMatrix, k: usize) -> Result<Vec<Vec<f64>>> {
        if x.cols != self.mean.len() {
            return Err(Error::LengthMismatch(self.mean.len(), x.cols));
        }
        let k = k.min(self.components.len());
        Ok((0..x.rows)
            .map(|i| {
                let row = x.row(i);
                self.components[..k]
                    .iter()
                    .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, v), m)| w * (v - m)).sum())
                    .collect()
            })
            .collect())
    }
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Ratios of the first `components` principal components of the table's
/// feature matrix.
pub fn pca_variance_ratios(table: &Table, components: usize) -> Result<Vec<f64>> {
    let mut r = PcaBasis::fit(&table.feature_matrix()?)?.ratios();
    r.truncate(components);
    Ok(r)
}

/// Projects both tables onto the basis fitted on `real`.
pub fn pca_project(real: &Table, syn: &Table, components: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if real.feature_names() != syn.feature_names() {
        return Err(Error::FeatureMismatch(alloc::string::String::from(
            "real and synthetic feature sets differ",
        )));
    }
    let xr = real.feature_matrix()?;
    let basis = PcaBasis::fit(&xr)?;
    Ok((basis.project(&xr, components)?, basis.project(&syn.feature_matrix()?, components)?))
}
