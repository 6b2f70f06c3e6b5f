//! Data files behind density, projection and attribution plots.

use shapaudit_core::dataset::ColumnData;
use shapaudit_core::metrics::{bin_counts, category_counts, shared_edges, AuditOutcome, PcaBasis};

use crate::report::{decimal17, ranked_features};

pub struct Density {
    pub feature: String,
    /// `(bin_left, bin_right, real_density, syn_density)`.
    pub bins: Vec<(f64, f64, f64, f64)>,
}

fn densities(counts: &[f64], widths: &[f64]) -> Vec<f64> {
    let n: f64 = counts.iter().sum();
    counts.iter().zip(widths).map(|(c, w)| if n > 0.0 { c / (n * w) } else { 0.0 }).collect()
}

/// Histograms on the shared KL binning. Coded columns get one unit-width
/// bin per category code, numeric columns with a zero-width range a single
/// unit-width bin around the value.
pub fn feature_density(real: &ColumnData, syn: &ColumnData, bins: usize) -> Vec<(f64, f64, f64, f64)> {
    let (edges, rc, sc): (Vec<(f64, f64)>, Vec<f64>, Vec<f64>) = match (real, syn) {
        (ColumnData::Coded { codes: a, .. }, ColumnData::Coded { codes: b, .. }) => {
            let (codes, p, q) = category_counts(a, b);
            let edges = codes.iter().map(|&c| (f64::from(c) - 0.5, f64::from(c) + 0.5)).collect();
            (edges, p, q)
        }
        _ => {
            let (a, b) = (real.values(), syn.values());
            match shared_edges(&a, &b, bins) {
                Some(e) => {
                    let pairs = e.windows(2).map(|w| (w[0], w[1])).collect();
                    (pairs, bin_counts(&a, &e), bin_counts(&b, &e))
                }
                None => {
                    let v = a.iter().chain(&b).copied().find(|x| !x.is_nan()).unwrap_or(0.0);
                    let count = |xs: &[f64]| xs.iter().filter(|x| !x.is_nan()).count() as f64;
                    (vec![(v - 0.5, v + 0.5)], vec![count(&a)], vec![count(&b)])
                }
            }
        }
    };
    let widths: Vec<f64> = edges.iter().map(|(l, r)| r - l).collect();
    let (rd, sd) = (densities(&rc, &widths), densities(&sc, &widths));
    edges
        .into_iter()
        .zip(rd.into_iter().zip(sd))
        .map(|((l, r), (p, q))| (l, r, p, q))
        .collect()
}

pub fn all_densities(outcome: &AuditOutcome, bins: usize) -> Vec<Density> {
    let (real, syn) = (&outcome.real_raw, &outcome.syn_raw);
    real.feature_names()
        .into_iter()
        .map(|name| {
            let r = real.column(real.column_index(&name).expect("own feature"));
            let s = syn.column(syn.column_index(&name).expect("shared transform"));
            Density {
                bins: feature_density(r, s, bins),
                feature: name,
            }
        })
        .collect()
}

pub fn density_csv(d: &Density) -> String {
    let mut out = String::from("bin_left,bin_right,real_density,syn_density\n");
    for (l, r, p, q) in &d.bins {
        out.push_str(&format!("{},{},{},{}\n", decimal17(*l), decimal17(*r), decimal17(*p), decimal17(*q)));
    }
    out
}

/// File name for a feature's density table. Characters outside
/// `[A-Za-z0-9._-]` become `_`; clashes get a numeric suffix.
pub fn density_file_names(features: &[String]) -> Vec<String> {
    let mut used = std::collections::BTreeSet::new();
    features
        .iter()
        .map(|f| {
            let stem: String = f
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
                .collect();
            let mut name = format!("density_{stem}.csv");
            let mut k = 2;
            while !used.insert(name.clone()) {
                name = format!("density_{stem}_{k}.csv");
                k += 1;
            }
            name
        })
        .collect()
}

/// Both tables projected on the real basis, first two components.
pub fn pca_points_csv(outcome: &AuditOutcome) -> Result<String, shapaudit_core::Error> {
    let xr = outcome.real_model.feature_matrix()?;
    let xs = outcome.syn_model.feature_matrix()?;
    let basis = PcaBasis::fit(&xr)?;
    let mut out = String::from("source,pc1,pc2\n");
    for (source, x) in [("real", &xr), ("syn", &xs)] {
        for p in basis.project(x, 2)? {
            let pc2 = p.get(1).copied().unwrap_or(0.0);
            out.push_str(&format!("{source},{},{}\n", decimal17(p[0]), decimal17(pc2)));
        }
    }
    Ok(out)
}

pub fn shap_topk_csv(outcome: &AuditOutcome, k: usize) -> String {
    let r = &outcome.report;
    let a = &r.attribution;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "phi_real", "phi_syn"]).expect("in-memory write");
    for (rank, f) in ranked_features(r).into_iter().take(k).enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            a.feature_names[f].clone(),
            decimal17(a.phi_real[f]),
            decimal17(a.phi_syn[f]),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integral(bins: &[(f64, f64, f64, f64)]) -> (f64, f64) {
        bins.iter().fold((0.0, 0.0), |(a, b), (l, r, p, q)| (a + (r - l) * p, b + (r - l) * q))
    }

    #[test]
    fn numeric_densities_integrate_to_one() {
        let a = ColumnData::Numeric(vec![0.1, 0.5, 3.0, 2.2, 9.0]);
        let b = ColumnData::Numeric(vec![-1.0, 4.0, 4.5]);
        let (p, q) = integral(&feature_density(&a, &b, 32));
        assert!((p - 1.0).abs() < 1e-9 && (q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coded_and_constant_columns() {
        let levels = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let a = ColumnData::Coded { codes: vec![0, 0, 2], levels: levels.clone() };
        let b = ColumnData::Coded { codes: vec![1], levels };
        let bins = feature_density(&a, &b, 32);
        assert_eq!(bins.len(), 3);
        let (p, q) = integral(&bins);
        assert!((p - 1.0).abs() < 1e-12 && (q - 1.0).abs() < 1e-12);
        let c = ColumnData::Numeric(vec![2.0, 2.0]);
        assert_eq!(feature_density(&c, &c, 32), vec![(1.5, 2.5, 1.0, 1.0)]);
    }

    #[test]
    fn file_names_are_safe_and_unique() {
        let names = density_file_names(&["a b".into(), "a_b".into(), "thal=normal".into()]);
        assert_eq!(names, vec!["density_a_b.csv", "density_a_b_2.csv", "density_thal_normal.csv"]);
    }
}
