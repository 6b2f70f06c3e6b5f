use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::FeatureMatrix;

pub(crate) fn column_means(x: &FeatureMatrix) -> Vec<f64> {
    let mut means = vec![0.0; x.cols];
    for i in 0..x.rows {
        for (m, v) in means.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let n = x.rows as f64;
    means.iter_mut().for_each(|m| *m /= n);
    means
}

/// Sample covariance (divisor n − 1), row-major `cols × cols`.
pub(crate) fn covariance(x: &FeatureMatrix, means: &[f64]) -> Vec<f64> {
    let d = x.cols;
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for i in 0..x.rows {
        for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(means) {
            *c = v - m;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            for b in a..d {
                cov[a * d + b] += ca * centered[b];
            }
        }
    }
    let denom = (x.rows.max(2) - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    cov
}
