use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapaudit_core::dataset::{ColumnData, ColumnKind, ColumnSchema, Table};
use shapaudit_core::metrics::{audit, gaps_from_matrices, AuditConfig, Auditor};
use shapaudit_core::model::TrainConfig;
use shapaudit_core::refine::{fit_generator, refine_loop, GeneratorKind, GeneratorSpec, RefineConfig};

/// Five numeric features plus a two-level categorical; the label depends
/// mostly on `x0`.
fn planted(n: usize, seed: u64) -> Table {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 5];
    let mut cat = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let c: u32 = r.random_range(0..2);
        let signal = 3.0 * x[0] + 0.5 * x[1] + 0.3 * f64::from(c) - 0.15 + r.random_range(-0.5..0.5);
        for (col, v) in cols.iter_mut().zip(&x) {
            col.push((v * 1000.0).round() / 1000.0);
        }
        cat.push(c);
        y.push(u32::from(signal > 0.0));
    }
    let mut schema: Vec<ColumnSchema> = (0..5).map(|k| ColumnSchema::feature(&format!("x{k}"), ColumnKind::Numeric)).collect();
    schema.push(ColumnSchema::feature("c", ColumnKind::Categorical));
    schema.push(ColumnSchema::target("y", ColumnKind::Binary));
    let mut columns: Vec<ColumnData> = cols.into_iter().map(ColumnData::Numeric).collect();
    columns.push(ColumnData::Coded {
        codes: cat,
        levels: vec!["a".into(), "b".into()],
    });
    columns.push(ColumnData::Coded {
        codes: y,
        levels: vec!["0".into(), "1".into()],
    });
    Table::new(schema, columns).unwrap()
}

fn quick_config(seed: u64) -> AuditConfig {
    AuditConfig {
        train: TrainConfig {
            num_rounds: 30,
            max_depth: 3,
            ..TrainConfig::default()
        },
        master_seed: seed,
        ..AuditConfig::default()
    }
}

#[test]
fn copy_audit_is_exact_identity() {
    let real = planted(400, 1);
    let report = audit(&real, &real.clone(), &quick_config(3)).unwrap();
    assert_eq!(report.shap_distance, 0.0);
    assert_eq!(report.mean_abs_attribution_diff, 0.0);
    assert!(report.per_feature_kl.iter().all(|(_, v)| *v == 0.0));
    assert_eq!((report.gaps.mean_gap, report.gaps.std_gap, report.gaps.cov_gap), (0.0, 0.0, 0.0));
    assert_eq!(report.gaps.spearman, Some(1.0));
    assert_eq!(report.accuracy.trtr, report.accuracy.tstr);
    assert_eq!(report.pca.real_ratios, report.pca.syn_ratios);
    assert!(report.attribution.max_local_accuracy_error_real <= 1e-9);
    assert_eq!(report.provenance.real_digest, report.provenance.syn_digest);
}

#[test]
fn audit_is_deterministic() {
    let real = planted(300, 2);
    let syn = planted(300, 9);
    let a = audit(&real, &syn, &quick_config(5)).unwrap();
    let b = audit(&real, &syn, &quick_config(5)).unwrap();
    assert_eq!(a, b);
    assert!(a.shap_distance > 0.0 && a.shap_distance <= 1.0);
}

#[test]
fn shuffled_labels_are_caught_by_attribution_not_moments() {
    let real = planted(600, 4);
    let target = real.target_index();
    let ColumnData::Coded { codes, levels } = real.column(target).clone() else { unreachable!() };
    let mut shuffled = codes;
    let mut r = ChaCha8Rng::seed_from_u64(77);
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, r.random_range(0..=i));
    }
    let syn = real.with_column(target, ColumnData::Coded { codes: shuffled, levels }).unwrap();
    let cfg = quick_config(6);
    let identity = audit(&real, &real, &cfg).unwrap();
    let corrupt = audit(&real, &syn, &cfg).unwrap();
    assert!(corrupt.gaps.mean_gap <= 1e-12 && corrupt.gaps.std_gap <= 1e-12);
    assert!(corrupt.shap_distance >= identity.shap_distance + 0.1, "{}", corrupt.shap_distance);
    assert!(corrupt.accuracy.tstr < identity.accuracy.tstr);
}

#[test]
fn stage_tags_on_errors() {
    let real = planted(100, 5);
    let mut cfg = quick_config(0);
    cfg.test_fraction = 1.5;
    assert_eq!(Auditor::new(&real, &cfg).unwrap_err().stage(), Some("config"));
    let y_only = Table::new(
        vec![
            ColumnSchema::feature("x", ColumnKind::Numeric),
            ColumnSchema::target("y", ColumnKind::Binary),
        ],
        vec![
            ColumnData::Numeric(vec![1.0; 10]),
            ColumnData::Coded {
                codes: vec![0; 10],
                levels: vec!["0".into(), "1".into()],
            },
        ],
    )
    .unwrap();
    assert_eq!(Auditor::new(&y_only, &quick_config(0)).unwrap_err().stage(), Some("transform"));
}

#[test]
fn vacuous_and_unreachable_epsilon() {
    let real = planted(200, 7);
    let spec = GeneratorSpec::new(GeneratorKind::MarginalResampler, 1, 200);
    let cfg = quick_config(1);
    let once = refine_loop(&real, &spec, &RefineConfig { epsilon: 2.0, max_iters: 5, ..RefineConfig::default() }, &cfg).unwrap();
    assert_eq!(once.trace.iterations.len(), 1);
    assert_eq!(once.trace.best_iteration, 0);
    let all = refine_loop(&real, &spec, &RefineConfig { epsilon: -1.0, max_iters: 4, ..RefineConfig::default() }, &cfg).unwrap();
    assert_eq!(all.trace.iterations.len(), 4);
    let min = all.trace.iterations.iter().map(|r| r.d_shap).fold(f64::INFINITY, f64::min);
    assert_eq!(all.trace.best().unwrap().d_shap, min);
    assert_eq!(all.best.report.shap_distance, min);
    for rec in &all.trace.iterations {
        assert!(rec.emphasis.iter().all(|(_, w)| (0.0..=1.0).contains(w)));
    }
}

#[test]
fn refinement_improves_planted_experiment() {
    let real = planted(500, 8);
    let spec = GeneratorSpec::new(GeneratorKind::MarginalResampler, 3, 500);
    let rc = RefineConfig { epsilon: 0.01, max_iters: 6, ..RefineConfig::default() };
    let out = refine_loop(&real, &spec, &rc, &quick_config(2)).unwrap();
    let first = out.trace.iterations[0].d_shap;
    assert!(out.trace.best().unwrap().d_shap <= first);
    // x0 dominates, so it is the first feature to be emphasised.
    assert_eq!(out.trace.iterations[0].divergent_features[0].name, "x0");
    let again = refine_loop(&real, &spec, &rc, &quick_config(2)).unwrap();
    assert_eq!(out.trace, again.trace);
}

#[test]
fn refine_error_keeps_partial_trace() {
    let real = planted(100, 9);
    let mut spec = GeneratorSpec::new(GeneratorKind::MarginalResampler, 3, 100);
    spec.emphasis.insert("x0".into(), 2.0);
    let err = refine_loop(&real, &spec, &RefineConfig::default(), &quick_config(0)).unwrap_err();
    assert!(err.trace.iterations.is_empty());
    assert_eq!(err.error.stage(), Some("config"));
}

#[test]
fn full_emphasis_resampler_gaps_within_bootstrap_noise() {
    let real = planted(800, 10);
    let m = 5000;
    let mut spec = GeneratorSpec::new(GeneratorKind::MarginalResampler, 0, m);
    for c in real.feature_names() {
        spec.emphasis.insert(c, 1.0);
    }
    let syn = fit_generator(&real, &spec).unwrap().sample(m, 11).unwrap();
    let (xr, xs) = (real.feature_matrix().unwrap(), syn.feature_matrix().unwrap());
    let gaps = gaps_from_matrices(&xr, &xs).unwrap();
    // Standard errors of a bootstrap mean and sd, from the real moments.
    let d = xr.cols;
    let (mut se_mean, mut se_sd) = (0.0, 0.0);
    for j in 0..d {
        let col = xr.column(j);
        let n = col.len() as f64;
        let mu = col.iter().sum::<f64>() / n;
        let m2 = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
        let m4 = col.iter().map(|v| (v - mu).powi(4)).sum::<f64>() / n;
        se_mean += (m2 / m as f64).sqrt();
        se_sd += ((m4 - m2 * m2) / (4.0 * m2 * m as f64)).sqrt();
    }
    // Mean of |N(0, se)| is se·√(2/π) ≤ se, so 3·mean(se) bounds the average gap generously.
    assert!(gaps.mean_gap <= 3.0 * se_mean / d as f64, "{} vs {}", gaps.mean_gap, se_mean / d as f64);
    assert!(gaps.std_gap <= 3.0 * se_sd / d as f64, "{} vs {}", gaps.std_gap, se_sd / d as f64);
}
