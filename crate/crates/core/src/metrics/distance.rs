use crate::attribution::GlobalAttributionVector;
use crate::math::sqrt;
use crate::{Error, Result};

const MIN_NORM: f64 = 1e-12;

fn aligned(a: &GlobalAttributionVector, b: &GlobalAttributionVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.feature_names != b.feature_names {
        return Err(Error::FeatureMismatch(alloc::string::String::from(
            "attribution vectors use different feature orderings",
        )));
    }
    Ok(())
}

/// `1 − a·b / (‖a‖‖b‖)` on raw slices.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if sqrt(na) <= MIN_NORM || sqrt(nb) <= MIN_NORM {
        return Err(Error::DegenerateAttribution("attribution vector has zero norm"));
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): equal inputs give exactly 0.
    let cos = dot / sqrt(na * nb);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

/// SHAP Distance between the real and synthetic global attribution vectors.
pub fn shap_distance(phi_real: &GlobalAttributionVector, phi_syn: &GlobalAttributionVector) -> Result<f64> {
    aligned(phi_real, phi_syn)?;
    cosine_distance(&phi_real.phi, &phi_syn.phi)
}

pub(crate) fn normalize_sum(v: &[f64]) -> Result<alloc::vec::Vec<f64>> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) {
        return Err(Error::DegenerateAttribution("attribution vector sums to zero"));
    }
    Ok(v.iter().map(|x| x / s).collect())
}

/// `(1/d) Σ_k |â_k − b̂_k|` after scaling each vector to sum 1.
pub fn mean_abs_attribution_diff(phi_real: &GlobalAttributionVector, phi_syn: &GlobalAttributionVector) -> Result<f64> {
    aligned(phi_real, phi_syn)?;
    let a = normalize_sum(&phi_real.phi)?;
    let b = normalize_sum(&phi_syn.phi)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::Aggregation;
    use alloc::format;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn gav(phi: &[f64]) -> GlobalAttributionVector {
        GlobalAttributionVector {
            phi: phi.to_vec(),
            aggregation: Aggregation::MeanAbs,
            feature_names: (0..phi.len()).map(|i| format!("f{i}")).collect(),
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(shap_distance(&gav(&[0.3, 1.7, 2.2]), &gav(&[0.3, 1.7, 2.2])).unwrap(), 0.0);
        assert_eq!(shap_distance(&gav(&[1.0, 0.0]), &gav(&[0.0, 1.0])).unwrap(), 1.0);
        let d = shap_distance(&gav(&[3.0, 4.0]), &gav(&[4.0, 3.0])).unwrap();
        assert!((d - 0.04).abs() <= 1e-12);
    }

    #[test]
    fn zero_norm_is_degenerate() {
        assert!(matches!(
            shap_distance(&gav(&[0.0, 0.0]), &gav(&[1.0, 0.0])),
            Err(Error::DegenerateAttribution(_))
        ));
        assert!(matches!(shap_distance(&gav(&[1.0]), &gav(&[1.0, 0.0])), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn mean_abs_diff_examples() {
        assert_eq!(mean_abs_attribution_diff(&gav(&[2.0, 5.0]), &gav(&[2.0, 5.0])).unwrap(), 0.0);
        assert_eq!(mean_abs_attribution_diff(&gav(&[1.0, 0.0]), &gav(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(mean_abs_attribution_diff(&gav(&[3.0, 1.0]), &gav(&[1.0, 3.0])).unwrap(), 0.5);
        assert!(mean_abs_attribution_diff(&gav(&[0.0, 0.0]), &gav(&[1.0, 3.0])).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariance_and_symmetry(
            v in proptest::collection::vec(0.0f64..10.0, 2..12),
            w in proptest::collection::vec(0.0f64..10.0, 12),
            c in 1e-3f64..1e3,
        ) {
            prop_assume!(v.iter().any(|&x| x > 1e-3));
            let w: Vec<f64> = w[..v.len()].iter().map(|x| x + 1e-3).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            prop_assert!(shap_distance(&gav(&v), &gav(&scaled)).unwrap() <= 1e-12);
            let ab = shap_distance(&gav(&v), &gav(&w)).unwrap();
            let ba = shap_distance(&gav(&w), &gav(&v)).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
