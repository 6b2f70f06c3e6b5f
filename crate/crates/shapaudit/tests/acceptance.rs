//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! are always printed; exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use shapaudit::io::load_csv;
use shapaudit_core::attribution::{brute_force_shapley, tree_shap_matrix, tree_shap_row, Aggregation, GlobalAttributionVector};
use shapaudit_core::dataset::{ColumnData, FeatureMatrix, Table};
use shapaudit_core::metrics::{gaps_from_matrices, kl_from_counts, shap_distance, AuditConfig, AuditReport, Auditor, PcaBasis};
use shapaudit_core::model::random::{random_ensemble, random_rows, RandomEnsembleSpec};
use shapaudit_core::refine::{refine_loop, GeneratorKind, GeneratorSpec, RefineConfig};
use shapaudit_core::seed::derive_seed;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Shared state: local-accuracy residuals and PCA sums seen by every run.
#[derive(Default)]
struct Ledger {
    local_errors: Vec<(String, f64)>,
    pca_sums: Vec<(String, f64)>,
}

impl Ledger {
    fn record(&mut self, label: &str, r: &AuditReport) {
        self.local_errors.push((format!("{label}/real"), r.attribution.max_local_accuracy_error_real));
        self.local_errors.push((format!("{label}/syn"), r.attribution.max_local_accuracy_error_syn));
        self.pca_sums.push((format!("{label}/real"), r.pca.real_full_sum));
        self.pca_sums.push((format!("{label}/syn"), r.pca.syn_full_sum));
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn heart() -> Table {
    load_csv(&data_dir().join("heart.csv"), None, None).expect("heart fixture loads")
}

fn shuffled_labels(real: &Table, seed: u64) -> Table {
    let t = real.target_index();
    let ColumnData::Coded { codes, levels } = real.column(t).clone() else {
        panic!("coded target");
    };
    let mut codes = codes;
    codes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    real.with_column(t, ColumnData::Coded { codes, levels }).unwrap()
}

fn config(seed: u64) -> AuditConfig {
    AuditConfig {
        master_seed: seed,
        ..AuditConfig::default()
    }
}

fn c1_oracle() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut cells) = (0.0f64, 0usize);
    let ensembles = 200;
    for e in 0..ensembles {
        let spec = RandomEnsembleSpec {
            features: 1 + e % 10,
            max_depth: 1 + (e / 10) % 4,
            trees: 1 + (e * 7) % 20,
            root_cover: 10_000,
        };
        let seed = derive_seed(20_240_601, &format!("c1/{e}"));
        let model = random_ensemble(&spec, seed);
        for row in random_rows(spec.features, 50, seed ^ 0x5eed) {
            let fast = tree_shap_row(&model, &row);
            let slow = brute_force_shapley(&model, &row).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
                cells += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs <= 300.0,
        format!("{ensembles} ensembles x 50 rows ({cells} entries), max |diff| = {worst:.2e}, {secs:.1} s"),
    )
}

fn c3_fixtures() -> Outcome {
    let gav = |phi: &[f64]| GlobalAttributionVector {
        phi: phi.to_vec(),
        aggregation: Aggregation::MeanAbs,
        feature_names: vec!["a".into(), "b".into()],
    };
    let d = shap_distance(&gav(&[3.0, 4.0]), &gav(&[4.0, 3.0])).unwrap();
    let kl = kl_from_counts(&[1.0, 1.0], &[1.0, 3.0], 1e-9).unwrap();
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut draw = |scale: f64| FeatureMatrix {
        data: (0..2 * n).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); scale * z }).collect::<Vec<f64>>(),
        rows: n,
        cols: 2,
    };
    let (id, double) = (draw(1.0), draw(std::f64::consts::SQRT_2));
    let cov = gaps_from_matrices(&id, &double).unwrap().cov_gap;
    let ok_d = (d - 0.04).abs() <= 1e-12;
    let ok_kl = (kl - 0.14384).abs() <= 1e-4;
    let ok_cov = (cov - std::f64::consts::SQRT_2).abs() <= 0.05;
    outcome(
        ok_d && ok_kl && ok_cov,
        format!("shap_distance = {d:.15}, kl = {kl:.6}, cov_gap = {cov:.4} (sqrt 2 = 1.4142)"),
    )
}

fn c4_identity(ledger: &mut Ledger) -> Outcome {
    let real = heart();
    let copy = real.clone();
    let start = Instant::now();
    let r = Auditor::new(&real, &config(7)).and_then(|a| a.evaluate(&copy)).unwrap().report;
    let secs = start.elapsed().as_secs_f64();
    ledger.record("identity", &r);
    let kl_max = r.per_feature_kl.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let g = &r.gaps;
    let ok = r.shap_distance == 0.0
        && kl_max <= 1e-12
        && g.mean_gap == 0.0
        && g.std_gap == 0.0
        && g.cov_gap == 0.0
        && g.spearman == Some(1.0)
        && r.accuracy.trtr == r.accuracy.tstr
        && secs <= 60.0;
    outcome(
        ok,
        format!(
            "shap_distance = {}, max kl = {kl_max}, gaps = ({}, {}, {}), spearman = {:?}, trtr = tstr = {:.4}, {secs:.2} s",
            r.shap_distance, g.mean_gap, g.std_gap, g.cov_gap, g.spearman, r.accuracy.trtr
        ),
    )
}

/// Pooled over a fixed set of master seeds: a single real holdout of about
/// 33 rows has a sampling sd near 0.09 on accuracy, far wider than the
/// tolerance.
fn c5_corruption(ledger: &mut Ledger) -> Outcome {
    let real = heart();
    let seeds: Vec<u64> = (0..100).collect();
    let (mut tstr, mut base, mut margin) = (0.0, 0.0, 0.0);
    let (mut min_margin, mut max_moment, mut above) = (f64::INFINITY, 0.0f64, 0);
    for &s in &seeds {
        let auditor = Auditor::new(&real, &config(s)).unwrap();
        let identity = auditor.evaluate(&real).unwrap().report;
        let corrupt = auditor.evaluate(&shuffled_labels(&real, 1000 + s)).unwrap().report;
        ledger.record(&format!("shuffle/{s}"), &corrupt);
        tstr += corrupt.accuracy.tstr;
        base += corrupt.accuracy.base_rate;
        let m = corrupt.shap_distance - identity.shap_distance;
        margin += m;
        min_margin = min_margin.min(m);
        above += usize::from(m >= 0.1);
        max_moment = max_moment.max(corrupt.gaps.mean_gap).max(corrupt.gaps.std_gap);
    }
    let k = seeds.len() as f64;
    let (tstr, base, margin) = (tstr / k, base / k, margin / k);
    let ok = (tstr - base).abs() <= 0.05 && max_moment <= 1e-12 && min_margin >= 0.1;
    outcome(
        ok,
        format!(
            "{} seeds: pooled tstr = {tstr:.4} vs base rate {base:.4}; max mean/std gap = {max_moment:.1e}; \
             mean shap_distance margin over identity = {margin:.4} (min {min_margin:.4}, >= 0.1 in {above}/{})",
            seeds.len(),
            seeds.len()
        ),
    )
}

fn c6_refinement(ledger: &mut Ledger) -> Outcome {
    let real = heart();
    let rc = RefineConfig {
        epsilon: 0.01,
        max_iters: 8,
        ..RefineConfig::default()
    };
    let (mut strictly, mut structural, mut max_len) = (0, true, 0);
    let mut summary = Vec::new();
    for s in 0..10u64 {
        let spec = GeneratorSpec::new(GeneratorKind::MarginalResampler, derive_seed(s, "generator"), real.row_count());
        let out = refine_loop(&real, &spec, &rc, &config(s)).unwrap();
        ledger.record(&format!("refine/{s}"), &out.best.report);
        let first = out.trace.iterations[0].d_shap;
        let best = out.trace.best().unwrap().d_shap;
        structural &= best <= first;
        strictly += usize::from(best < first);
        max_len = max_len.max(out.trace.iterations.len());
        summary.push(format!("{first:.3}->{best:.3}"));
    }
    outcome(
        structural && strictly >= 8 && max_len <= 8,
        format!("strictly lower in {strictly}/10 seeds, longest trace {max_len}; {}", summary.join(" ")),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_shapaudit"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn c7_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let heart = data_dir().join("heart.csv");
    let heart = heart.to_str().unwrap();
    let syn_dir = tmp.path().join("syn");
    let syn_dir = syn_dir.to_str().unwrap();
    let mut same = Vec::new();
    // A refined synthetic table serves as the audit input.
    let ok_syn = run_cli(&["refine", "--real", heart, "--seed", "5", "--output", syn_dir]);
    let syn = format!("{syn_dir}/best_synthetic.csv");
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let out = out.to_str().unwrap();
        same.push(
            run_cli(&["audit", "--real", heart, "--syn", &syn, "--seed", "5", "--output", &format!("{out}/audit")])
                && run_cli(&["refine", "--real", heart, "--seed", "5", "--output", &format!("{out}/refine")]),
        );
    }
    let read = |p: &str| std::fs::read(tmp.path().join(p)).unwrap_or_default();
    let report_same = read("a/audit/report.json") == read("b/audit/report.json") && !read("a/audit/report.json").is_empty();
    let trace_same = read("a/refine/trace.jsonl") == read("b/refine/trace.jsonl") && !read("a/refine/trace.jsonl").is_empty();
    let refine_report_same = read("a/refine/report.json") == read("b/refine/report.json");
    outcome(
        ok_syn && same.iter().all(|&b| b) && report_same && trace_same && refine_report_same,
        format!("audit report.json identical: {report_same}; refine trace.jsonl identical: {trace_same}; refine report.json identical: {refine_report_same}"),
    )
}

fn c8_performance(ledger: &mut Ledger) -> Outcome {
    let spec = RandomEnsembleSpec {
        features: 50,
        max_depth: 6,
        trees: 100,
        root_cover: 1 << 20,
    };
    let model = random_ensemble(&spec, 8);
    let rows = random_rows(50, 1000, 9);
    let x = FeatureMatrix {
        data: rows.concat(),
        rows: 1000,
        cols: 50,
    };
    let start = Instant::now();
    let m = tree_shap_matrix(&model, &x, None);
    let secs = start.elapsed().as_secs_f64();
    let local = m.max_local_accuracy_error(&model, &x);
    ledger.local_errors.push(("performance".into(), local));
    let depth = model.trees.iter().map(|t| t.depth()).max().unwrap_or(0);
    outcome(
        secs <= 10.0,
        format!("100 trees, depth {depth}, d = 50, 1000 rows in {secs:.3} s; local accuracy {local:.1e}"),
    )
}

fn c9_pca(ledger: &Ledger) -> Outcome {
    let x = FeatureMatrix {
        data: vec![1.0, 0.0, 4.0, 0.0, -2.0, 0.0, 7.5, 0.0, 3.25, 0.0],
        rows: 5,
        cols: 2,
    };
    let pc1 = PcaBasis::fit(&x).unwrap().ratios()[0];
    let worst = ledger.pca_sums.iter().map(|(_, s)| (s - 1.0).abs()).fold(0.0, f64::max);
    outcome(
        pc1 == 1.0 && worst <= 1e-9 && !ledger.pca_sums.is_empty(),
        format!("1-D fixture PC1 = {pc1:?}; {} datasets, max |sum - 1| = {worst:.1e}", ledger.pca_sums.len()),
    )
}

fn c2_local_accuracy(ledger: &Ledger) -> Outcome {
    let (label, worst) = ledger
        .local_errors
        .iter()
        .cloned()
        .fold((String::new(), 0.0f64), |acc, (l, e)| if e > acc.1 { (l, e) } else { acc });
    outcome(
        worst <= 1e-9 && !ledger.local_errors.is_empty(),
        format!("{} explained populations, worst {worst:.1e} ({label})", ledger.local_errors.len()),
    )
}

fn main() {
    // `cargo test -- --list` and similar should not run the suite.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut ledger = Ledger::default();
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let mut timed = |id: u8, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        eprintln!("  criterion {id} finished in {:.1} s", start.elapsed().as_secs_f64());
        results.push((id, name, out));
    };
    timed(1, "oracle equivalence", &mut c1_oracle);
    timed(3, "metric fixtures", &mut c3_fixtures);
    timed(4, "full-pipeline identity", &mut || c4_identity(&mut ledger));
    timed(5, "corruption sensitivity", &mut || c5_corruption(&mut ledger));
    timed(6, "refinement efficacy", &mut || c6_refinement(&mut ledger));
    timed(7, "determinism", &mut c7_determinism);
    timed(8, "performance", &mut || c8_performance(&mut ledger));
    timed(2, "local accuracy", &mut || c2_local_accuracy(&ledger));
    timed(9, "pca sanity", &mut || c9_pca(&ledger));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, o) in &results {
        println!("[{}] criterion {id} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
