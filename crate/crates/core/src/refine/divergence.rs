use alloc::string::String;
use alloc::vec::Vec;

use crate::attribution::GlobalAttributionVector;
use crate::metrics::normalize_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DivergentFeature {
    pub index: usize,
    pub name: String,
    /// `|φ̂_real − φ̂_syn|` after normalising each vector to sum 1.
    pub score: f64,
}

/// The `top_k` features whose normalised attributions differ most, ties
/// broken by feature index.
pub fn identify_divergent_features(
    phi_real: &GlobalAttributionVector,
    phi_syn: &GlobalAttributionVector,
    top_k: usize,
) -> Result<Vec<DivergentFeature>> {
    if top_k == 0 {
        return Err(Error::InvalidParameter(String::from("top_k must be at least 1")));
    }
    if phi_real.len() != phi_syn.len() {
        return Err(Error::LengthMismatch(phi_real.len(), phi_syn.len()));
    }
    if phi_real.feature_names != phi_syn.feature_names {
        return Err(Error::FeatureMismatch(String::from(
            "attribution vectors use different feature orderings",
        )));
    }
    let a = normalize_sum(&phi_real.phi)?;
    let b = normalize_sum(&phi_syn.phi)?;
    let mut ranked: Vec<DivergentFeature> = a
        .iter()
        .zip(&b)
        .enumerate()
        .map(|(index, (x, y))| DivergentFeature {
            index,
            name: phi_real.feature_names.get(index).cloned().unwrap_or_default(),
            score: (x - y).abs(),
        })
        .collect();
    ranked.sort_by(|p, q| q.score.total_cmp(&p.score).then(p.index.cmp(&q.index)));
    ranked.truncate(top_k);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::Aggregation;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn gav(phi: &[f64]) -> GlobalAttributionVector {
        GlobalAttributionVector {
            phi: phi.to_vec(),
            aggregation: Aggregation::MeanAbs,
            feature_names: (0..phi.len()).map(|i| format!("f{i}")).collect(),
        }
    }

    #[test]
    fn swapped_pair() {
        let out = identify_divergent_features(&gav(&[0.8, 0.2]), &gav(&[0.2, 0.8]), 1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].index, 0);
        assert!((out[0].score - 0.6).abs() < 1e-15);
    }

    #[test]
    fn identical_vectors_return_leading_indices() {
        let out = identify_divergent_features(&gav(&[1.0, 2.0, 3.0, 4.0]), &gav(&[2.0, 4.0, 6.0, 8.0]), 2).unwrap();
        assert_eq!(out.iter().map(|f| (f.index, f.score)).collect::<Vec<_>>(), vec![(0, 0.0), (1, 0.0)]);
    }

    #[test]
    fn errors() {
        assert!(identify_divergent_features(&gav(&[0.0, 0.0]), &gav(&[1.0, 0.0]), 1).is_err());
        assert!(identify_divergent_features(&gav(&[1.0]), &gav(&[1.0]), 0).is_err());
        assert!(identify_divergent_features(&gav(&[1.0]), &gav(&[1.0, 0.0]), 1).is_err());
    }

    proptest! {
        #[test]
        fn permutation_equivariant(
            a in proptest::collection::vec(0.01f64..5.0, 5),
            b in proptest::collection::vec(0.01f64..5.0, 5),
            rot in 0usize..5,
        ) {
            let perm: Vec<usize> = (0..5).map(|i| (i + rot) % 5).collect();
            let pa: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
            let pb: Vec<f64> = perm.iter().map(|&i| b[i]).collect();
            let base = identify_divergent_features(&gav(&a), &gav(&b), 5).unwrap();
            let moved = identify_divergent_features(&gav(&pa), &gav(&pb), 5).unwrap();
            // Normalising sums in a different order perturbs the last bits only.
            for (x, y) in base.iter().zip(&moved) {
                prop_assert!((x.score - y.score).abs() <= 1e-12);
            }
            let distinct = base.windows(2).all(|w| w[0].score - w[1].score > 1e-9);
            if distinct {
                for (x, y) in base.iter().zip(&moved) {
                    prop_assert_eq!(x.index, perm[y.index]);
                }
            }
        }
    }
}
