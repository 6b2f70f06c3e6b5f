//! Built-in oracle-equivalence and identity checks.

use shapaudit_core::attribution::{brute_force_shapley, tree_shap_row};
use shapaudit_core::dataset::{ColumnData, ColumnKind, ColumnSchema, Table};
use shapaudit_core::metrics::{audit, AuditConfig};
use shapaudit_core::model::random::{random_ensemble, random_rows, RandomEnsembleSpec};
use shapaudit_core::model::TrainConfig;
use shapaudit_core::seed::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest entrywise gap between TreeSHAP and subset enumeration over
/// `ensembles` random models with 20 rows each, plus the largest
/// local-accuracy residual.
pub fn oracle_gap(ensembles: usize, seed: u64) -> (f64, f64) {
    let (mut worst, mut local) = (0.0f64, 0.0f64);
    for e in 0..ensembles {
        let s = derive_seed(seed, &format!("selftest/ensemble/{e}"));
        let spec = RandomEnsembleSpec {
            features: 2 + e % 7,
            max_depth: 1 + e % 4,
            trees: 1 + e % 10,
            root_cover: 1000,
        };
        let model = random_ensemble(&spec, s);
        for row in random_rows(spec.features, 20, s ^ 1) {
            let fast = tree_shap_row(&model, &row);
            let slow = brute_force_shapley(&model, &row).expect("d within the enumeration limit");
            for (a, b) in fast.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
            }
            let sum: f64 = fast.iter().sum::<f64>() + model.expected_margin();
            local = local.max((sum - model.predict_margin(&row)).abs());
        }
    }
    (worst, local)
}

/// A small table whose label depends on the first two of four features.
pub fn demo_table(rows: usize, seed: u64) -> Table {
    let x = random_rows(4, rows, seed);
    let mut schema: Vec<ColumnSchema> = (0..4).map(|k| ColumnSchema::feature(format!("x{k}"), ColumnKind::Numeric)).collect();
    schema.push(ColumnSchema::target("y", ColumnKind::Binary));
    let mut columns: Vec<ColumnData> = (0..4).map(|k| ColumnData::Numeric(x.iter().map(|r| r[k]).collect())).collect();
    columns.push(ColumnData::Coded {
        codes: x.iter().map(|r| u32::from(r[0] + 0.4 * r[1] - 0.1 * r[2] * r[3] > 0.0)).collect(),
        levels: vec!["0".into(), "1".into()],
    });
    Table::new(schema, columns).expect("well-formed demo table")
}

pub fn run(ensembles: usize, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let (gap, local) = oracle_gap(ensembles, seed);
    checks.push(Check {
        name: "oracle_equivalence",
        passed: gap <= 1e-9,
        detail: format!("{ensembles} ensembles x 20 rows, max |treeshap - brute force| = {gap:.3e}"),
    });
    checks.push(Check {
        name: "local_accuracy",
        passed: local <= 1e-9,
        detail: format!("max |base + sum(phi) - margin| = {local:.3e}"),
    });

    let real = demo_table(400, seed);
    let cfg = AuditConfig {
        train: TrainConfig {
            num_rounds: 40,
            max_depth: 3,
            ..TrainConfig::default()
        },
        master_seed: seed,
        ..AuditConfig::default()
    };
    let (passed, detail) = match audit(&real, &real.clone(), &cfg) {
        Ok(r) => {
            let ok = r.shap_distance == 0.0
                && r.per_feature_kl.iter().all(|(_, v)| *v <= 1e-12)
                && r.gaps.mean_gap == 0.0
                && r.gaps.std_gap == 0.0
                && r.gaps.cov_gap == 0.0
                && r.gaps.spearman == Some(1.0)
                && r.accuracy.trtr == r.accuracy.tstr;
            (ok, format!("shap_distance = {}, trtr = {}, tstr = {}", r.shap_distance, r.accuracy.trtr, r.accuracy.tstr))
        }
        Err(e) => (false, e.to_string()),
    };
    checks.push(Check {
        name: "audit_identity",
        passed,
        detail,
    });
    checks
}
