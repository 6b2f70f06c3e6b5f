//! JSON, JSON-lines and CSV renderings of audit and refinement results.

use serde_json::{Map, Number, Value};
use shapaudit_core::attribution::AttributionMatrix;
use shapaudit_core::metrics::{AuditReport, DEFINITIONS};
use shapaudit_core::refine::{IterationRecord, RefinementTrace};

pub const REPORT_VERSION: u64 = 1;

/// A real as a JSON number with 17 significant digits, written
/// positionally for moderate exponents. Non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_string_unchecked(decimal17(x)))
}

pub fn decimal17(x: f64) -> String {
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-7..=17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = 1 + exp;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}.0", digits, "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    format!("{sign}{body}")
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn obj(entries: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn report_value(r: &AuditReport) -> Value {
    let kl: Map<String, Value> = r.per_feature_kl.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    let seeds: Map<String, Value> = r
        .provenance
        .stage_seeds
        .iter()
        .map(|(k, v)| (k.clone(), Value::from(*v)))
        .collect();
    let defs: Map<String, Value> = DEFINITIONS.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect();
    let a = &r.attribution;
    obj([
        ("report_version", Value::from(REPORT_VERSION)),
        ("shap_distance", num(r.shap_distance)),
        ("mean_abs_attribution_diff", num(r.mean_abs_attribution_diff)),
        ("per_feature_kl", Value::Object(kl)),
        (
            "pca",
            obj([
                ("components", Value::from(r.pca.components)),
                ("real_ratios", nums(&r.pca.real_ratios)),
                ("syn_ratios", nums(&r.pca.syn_ratios)),
                ("real_full_sum", num(r.pca.real_full_sum)),
                ("syn_full_sum", num(r.pca.syn_full_sum)),
            ]),
        ),
        (
            "gaps",
            obj([
                ("mean_gap", num(r.gaps.mean_gap)),
                ("std_gap", num(r.gaps.std_gap)),
                ("cov_gap", num(r.gaps.cov_gap)),
                ("spearman", r.gaps.spearman.map_or(Value::Null, num)),
            ]),
        ),
        (
            "accuracy",
            obj([
                ("trtr", num(r.accuracy.trtr)),
                ("tstr", num(r.accuracy.tstr)),
                ("base_rate", num(r.accuracy.base_rate)),
            ]),
        ),
        (
            "attribution",
            obj([
                ("aggregation", Value::from(a.aggregation.as_str())),
                ("feature_names", Value::from(a.feature_names.clone())),
                ("phi_real", nums(&a.phi_real)),
                ("phi_syn", nums(&a.phi_syn)),
                ("explained_rows", Value::from(a.explained_rows)),
                ("base_value_real", num(a.base_value_real)),
                ("base_value_syn", num(a.base_value_syn)),
                ("max_local_accuracy_error_real", num(a.max_local_accuracy_error_real)),
                ("max_local_accuracy_error_syn", num(a.max_local_accuracy_error_syn)),
            ]),
        ),
        (
            "rows",
            obj([
                ("real", Value::from(r.rows.real)),
                ("syn", Value::from(r.rows.syn)),
                ("real_train", Value::from(r.rows.real_train)),
                ("real_test", Value::from(r.rows.real_test)),
                ("syn_train", Value::from(r.rows.syn_train)),
            ]),
        ),
        ("warnings", Value::from(r.warnings.clone())),
        (
            "provenance",
            obj([
                ("master_seed", Value::from(r.provenance.master_seed)),
                ("stage_seeds", Value::Object(seeds)),
                ("config_digest", Value::from(r.provenance.config_digest.clone())),
                ("real_digest", Value::from(r.provenance.real_digest.clone())),
                ("syn_digest", Value::from(r.provenance.syn_digest.clone())),
            ]),
        ),
        ("definitions", Value::Object(defs)),
    ])
}

pub fn report_json(r: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(&report_value(r)).expect("report serializes");
    s.push('\n');
    s
}

pub fn iteration_value(rec: &IterationRecord, best_so_far: f64) -> Value {
    let divergent: Vec<Value> = rec
        .divergent_features
        .iter()
        .map(|f| {
            obj([
                ("feature", Value::from(f.name.clone())),
                ("index", Value::from(f.index)),
                ("score", num(f.score)),
            ])
        })
        .collect();
    let emphasis: Map<String, Value> = rec.emphasis.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    obj([
        ("t", Value::from(rec.t)),
        ("d_shap", num(rec.d_shap)),
        ("best_d_shap", num(best_so_far)),
        ("divergent_features", Value::Array(divergent)),
        ("generator_spec_digest", Value::from(rec.generator_spec_digest.clone())),
        ("sample_seed", Value::from(rec.sample_seed)),
        ("emphasis", Value::Object(emphasis)),
    ])
}

/// One JSON object per iteration, newline-terminated.
pub fn trace_jsonl(trace: &RefinementTrace) -> String {
    let mut out = String::new();
    let mut best = f64::INFINITY;
    for rec in &trace.iterations {
        best = best.min(rec.d_shap);
        out.push_str(&serde_json::to_string(&iteration_value(rec, best)).expect("trace serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_summary_json(trace: &RefinementTrace) -> String {
    let v = obj([
        ("iterations", Value::from(trace.iterations.len())),
        ("best_iteration", Value::from(trace.best_iteration)),
        ("best_d_shap", trace.best().map_or(Value::Null, |b| num(b.d_shap))),
        ("epsilon", num(trace.epsilon)),
        ("max_iters", Value::from(trace.max_iters)),
    ]);
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}

/// Long-format attribution table: `row_id,feature,shap_value`.
pub fn attributions_csv(m: &AttributionMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row_id", "feature", "shap_value"]).expect("in-memory write");
    for i in 0..m.n_rows {
        for (k, v) in m.row(i).iter().enumerate() {
            w.write_record([m.row_ids[i].to_string(), m.feature_names[k].clone(), decimal17(*v)])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Features ordered by `max(phi_real, phi_syn)`, descending, ties by index.
pub fn ranked_features(r: &AuditReport) -> Vec<usize> {
    let a = &r.attribution;
    let mut order: Vec<usize> = (0..a.phi_real.len()).collect();
    let key = |k: usize| a.phi_real[k].max(a.phi_syn[k]);
    order.sort_by(|&x, &y| key(y).total_cmp(&key(x)).then(x.cmp(&y)));
    order
}

pub fn shap_summary_json(r: &AuditReport, top_k: usize) -> String {
    let a = &r.attribution;
    let top: Vec<Value> = ranked_features(r)
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(rank, k)| {
            obj([
                ("rank", Value::from(rank + 1)),
                ("feature", Value::from(a.feature_names[k].clone())),
                ("phi_real", num(a.phi_real[k])),
                ("phi_syn", num(a.phi_syn[k])),
            ])
        })
        .collect();
    let v = obj([
        ("aggregation", Value::from(a.aggregation.as_str())),
        ("shap_distance", num(r.shap_distance)),
        ("top_features", Value::Array(top)),
    ]);
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}
