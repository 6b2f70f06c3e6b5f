//! The end-to-end audit of one real/synthetic pair.

use alloc::string::String;
use alloc::vec::Vec;

use super::distance::{mean_abs_attribution_diff, shap_distance};
use super::gaps::{statistical_gaps, StatisticalGaps};
use super::kl::{column_kl, KlConfig};
use super::pca::PcaBasis;
use crate::attribution::{attribution_rows_for_audit, global_attribution, Aggregation, AttributionMatrix, GlobalAttributionVector};
use crate::dataset::{
    apply_transform, fit_transform, split, undersample, Encoding, FittedTransform, Normalization, PreprocessSpec, Table,
};
use crate::digest::Fingerprint;
use crate::error::StageExt;
use crate::model::{accuracy, train, TrainConfig, TreeEnsemble};
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Where undersampling happens relative to the train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndersampleStage {
    /// Balance the whole table, then split.
    #[default]
    BeforeSplit,
    /// Split first, balance only the training partitions.
    AfterSplit,
}

impl UndersampleStage {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BeforeSplit => "before_split",
            Self::AfterSplit => "after_split",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "before_split" => Some(Self::BeforeSplit),
            "after_split" => Some(Self::AfterSplit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub preprocess: PreprocessSpec,
    pub undersample_stage: UndersampleStage,
    /// `seed` is ignored; the training seed is derived from `master_seed`.
    pub train: TrainConfig,
    pub kl: KlConfig,
    pub pca_components: usize,
    pub aggregation: Aggregation,
    pub test_fraction: f64,
    pub max_explain_rows: usize,
    pub master_seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessSpec::default(),
            undersample_stage: UndersampleStage::default(),
            train: TrainConfig::default(),
            kl: KlConfig::default(),
            pca_components: 2,
            aggregation: Aggregation::MeanAbs,
            test_fraction: 0.2,
            max_explain_rows: 1000,
            master_seed: 0,
        }
    }
}

/// Stage names fed to [`derive_seed`].
pub const SEED_STAGES: [&str; 4] = ["undersample", "split", "train", "explain"];

fn encoding_str(e: Encoding) -> &'static str {
    match e {
        Encoding::Label => "label",
        Encoding::OneHot => "one_hot",
    }
}

fn normalization_str(n: Normalization) -> &'static str {
    match n {
        Normalization::None => "none",
        Normalization::MinMax => "min_max",
        Normalization::ZScore => "z_score",
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.test_fraction));
        }
        let bad = |m: &str| Err(Error::InvalidParameter(String::from(m)));
        if self.kl.bins == 0 {
            return bad("kl_bins must be positive");
        }
        if !(self.kl.epsilon > 0.0 && self.kl.epsilon.is_finite()) {
            return bad("kl_epsilon must be positive and finite");
        }
        if self.pca_components == 0 {
            return bad("pca_components must be positive");
        }
        if self.max_explain_rows == 0 {
            return bad("max_explain_rows must be positive");
        }
        Ok(())
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.master_seed, stage)
    }

    /// Feeds every field into `fp` in a fixed order.
    pub fn fingerprint_into(&self, fp: &mut Fingerprint) {
        fp.str(encoding_str(self.preprocess.encoding))
            .str(normalization_str(self.preprocess.normalization))
            .bool(self.preprocess.undersample)
            .str(self.undersample_stage.as_str())
            .u64(self.train.num_rounds as u64)
            .u64(self.train.max_depth as u64)
            .f64(self.train.learning_rate)
            .u64(self.train.min_child_cover as u64)
            .f64(self.train.l2_regularization)
            .u64(self.kl.bins as u64)
            .f64(self.kl.epsilon)
            .u64(self.pca_components as u64)
            .str(self.aggregation.as_str())
            .f64(self.test_fraction)
            .u64(self.max_explain_rows as u64)
            .u64(self.master_seed);
    }

    pub fn digest(&self) -> String {
        let mut fp = Fingerprint::new("audit-config/v1");
        self.fingerprint_into(&mut fp);
        fp.hex()
    }

    fn raw_spec(&self) -> PreprocessSpec {
        PreprocessSpec {
            normalization: Normalization::None,
            ..self.preprocess
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaSummary {
    pub components: usize,
    pub real_ratios: Vec<f64>,
    pub syn_ratios: Vec<f64>,
    /// Sum over all components; 1 up to round-off.
    pub real_full_sum: f64,
    pub syn_full_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySummary {
    /// Classifier trained on real, tested on the real holdout.
    pub trtr: f64,
    /// Classifier trained on synthetic, tested on the real holdout.
    pub tstr: f64,
    /// Majority-class share of the real holdout.
    pub base_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionSummary {
    pub aggregation: Aggregation,
    pub feature_names: Vec<String>,
    pub phi_real: Vec<f64>,
    pub phi_syn: Vec<f64>,
    pub explained_rows: usize,
    pub base_value_real: f64,
    pub base_value_syn: f64,
    pub max_local_accuracy_error_real: f64,
    pub max_local_accuracy_error_syn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowCounts {
    pub real: usize,
    pub syn: usize,
    pub real_train: usize,
    pub real_test: usize,
    pub syn_train: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub master_seed: u64,
    pub stage_seeds: Vec<(String, u64)>,
    pub config_digest: String,
    pub real_digest: String,
    pub syn_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub shap_distance: f64,
    pub mean_abs_attribution_diff: f64,
    /// Keyed by transformed feature name, in feature order.
    pub per_feature_kl: Vec<(String, f64)>,
    pub pca: PcaSummary,
    pub gaps: StatisticalGaps,
    pub accuracy: AccuracySummary,
    pub attribution: AttributionSummary,
    pub rows: RowCounts,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

/// Plain-language formulas stored next to every report.
pub const DEFINITIONS: [(&str, &str); 7] = [
    ("shap_distance", "1 - dot(phi_real, phi_syn) / (|phi_real| |phi_syn|)"),
    ("mean_abs_attribution_diff", "mean_k |phi_real_k / sum(phi_real) - phi_syn_k / sum(phi_syn)|"),
    ("per_feature_kl", "sum_i p_i ln(p_i / q_i), p = real, shared bins, epsilon-smoothed"),
    ("pca", "eigenvalues of the n-1 sample covariance divided by its trace"),
    ("mean_gap", "mean_k |mean_real_k - mean_syn_k| on untransformed scales"),
    ("std_gap", "mean_k |sd_real_k - sd_syn_k|, sd with divisor n-1"),
    ("cov_gap / spearman", "Frobenius norm of cov_real - cov_syn / Spearman correlation of per-feature means"),
];

/// Everything computed during an audit, including the intermediate tables
/// and models the report summarises.
#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub report: AuditReport,
    pub model_real: TreeEnsemble,
    pub model_syn: TreeEnsemble,
    pub attributions_real: AttributionMatrix,
    pub attributions_syn: AttributionMatrix,
    /// Transformed tables without normalisation, all rows.
    pub real_raw: Table,
    pub syn_raw: Table,
    /// Transformed tables as seen by the models, all rows.
    pub real_model: Table,
    pub syn_model: Table,
}

fn balance_and_split(table: &Table, cfg: &AuditConfig) -> Result<(Table, Table)> {
    let seed_us = cfg.stage_seed("undersample");
    let seed_split = cfg.stage_seed("split");
    match (cfg.preprocess.undersample, cfg.undersample_stage) {
        (false, _) => split(table, cfg.test_fraction, seed_split).stage("split"),
        (true, UndersampleStage::BeforeSplit) => {
            let balanced = undersample(table, seed_us).stage("undersample")?;
            split(&balanced, cfg.test_fraction, seed_split).stage("split")
        }
        (true, UndersampleStage::AfterSplit) => {
            let (tr, te) = split(table, cfg.test_fraction, seed_split).stage("split")?;
            Ok((undersample(&tr, seed_us).stage("undersample")?, te))
        }
    }
}

fn base_rate(test: &Table) -> Result<f64> {
    let y = test.target_labels()?;
    let ones = y.iter().filter(|&&v| v == 1).count();
    Ok(ones.max(y.len() - ones) as f64 / y.len() as f64)
}

/// Real-side state of an audit. Building it once lets many synthetic
/// candidates be scored against the same reference classifier.
#[derive(Debug, Clone)]
pub struct Auditor {
    config: AuditConfig,
    raw_transform: FittedTransform,
    model_transform: FittedTransform,
    real_raw: Table,
    real_model: Table,
    real_pca: PcaBasis,
    real_train_rows: usize,
    real_test: Table,
    model_real: TreeEnsemble,
    attributions_real: AttributionMatrix,
    phi_real: GlobalAttributionVector,
    real_local_error: f64,
    trtr: f64,
    base_rate: f64,
    real_digest: String,
    real_rows: usize,
}

impl Auditor {
    pub fn new(real: &Table, config: &AuditConfig) -> Result<Self> {
        config.validate().stage("config")?;
        let raw_transform = fit_transform(real, &config.raw_spec()).stage("transform")?;
        let model_transform = fit_transform(real, &config.preprocess).stage("transform")?;
        let real_raw = apply_transform(real, &raw_transform).stage("transform")?;
        let real_model = apply_transform(real, &model_transform).stage("transform")?;
        let real_pca = PcaBasis::fit(&real_model.feature_matrix().stage("pca")?).stage("pca")?;

        let (real_train, real_test) = balance_and_split(&real_model, config)?;
        let train_cfg = TrainConfig {
            seed: config.stage_seed("train"),
            ..config.train.clone()
        };
        let model_real = train(&real_train, &train_cfg).stage("train_real")?;
        let attributions_real =
            attribution_rows_for_audit(&model_real, &real_test, config.max_explain_rows, config.stage_seed("explain"))
                .stage("explain_real")?;
        let phi_real = global_attribution(&attributions_real, config.aggregation).stage("explain_real")?;
        let x_test = real_test.feature_matrix().stage("explain_real")?;
        let real_local_error = attributions_real.max_local_accuracy_error(&model_real, &x_test);
        let trtr = accuracy(&model_real, &real_test).stage("accuracy")?;
        let base_rate = base_rate(&real_test).stage("accuracy")?;
        Ok(Self {
            config: config.clone(),
            real_digest: real.digest(),
            real_rows: real.row_count(),
            real_train_rows: real_train.row_count(),
            raw_transform,
            model_transform,
            real_raw,
            real_model,
            real_pca,
            real_test,
            model_real,
            attributions_real,
            phi_real,
            real_local_error,
            trtr,
            base_rate,
        })
    }

    pub fn config(&self) -> &AuditConfig {
        &self.config
    }

    pub fn model_real(&self) -> &TreeEnsemble {
        &self.model_real
    }

    pub fn phi_real(&self) -> &GlobalAttributionVector {
        &self.phi_real
    }

    pub fn real_test(&self) -> &Table {
        &self.real_test
    }

    pub fn evaluate(&self, syn: &Table) -> Result<AuditOutcome> {
        let cfg = &self.config;
        let syn_raw = apply_transform(syn, &self.raw_transform).stage("transform_syn")?;
        let syn_model = apply_transform(syn, &self.model_transform).stage("transform_syn")?;

        let names = self.real_raw.feature_names();
        let per_feature_kl = names
            .iter()
            .map(|name| {
                let r = self.real_raw.column(self.real_raw.column_index(name).expect("own feature"));
                let s = syn_raw.column(syn_raw.column_index(name).expect("same transform"));
                Ok((name.clone(), column_kl(r, s, &cfg.kl)?))
            })
            .collect::<Result<Vec<_>>>()
            .stage("kl")?;
        let gaps = statistical_gaps(&self.real_raw, &syn_raw).stage("gaps")?;

        let syn_pca = PcaBasis::fit(&syn_model.feature_matrix().stage("pca")?).stage("pca")?;
        let (real_full, syn_full) = (self.real_pca.ratios(), syn_pca.ratios());
        let k = cfg.pca_components;
        let pca = PcaSummary {
            components: k,
            real_ratios: real_full.iter().take(k).copied().collect(),
            syn_ratios: syn_full.iter().take(k).copied().collect(),
            real_full_sum: real_full.iter().sum(),
            syn_full_sum: syn_full.iter().sum(),
        };

        let (syn_train, _) = balance_and_split(&syn_model, cfg)?;
        let train_cfg = TrainConfig {
            seed: cfg.stage_seed("train"),
            ..cfg.train.clone()
        };
        let model_syn = train(&syn_train, &train_cfg).stage("train_syn")?;
        let attributions_syn =
            attribution_rows_for_audit(&model_syn, &self.real_test, cfg.max_explain_rows, cfg.stage_seed("explain"))
                .stage("explain_syn")?;
        let phi_syn = global_attribution(&attributions_syn, cfg.aggregation).stage("explain_syn")?;
        let x_test = self.real_test.feature_matrix().stage("explain_syn")?;
        let syn_local_error = attributions_syn.max_local_accuracy_error(&model_syn, &x_test);

        let d_shap = shap_distance(&self.phi_real, &phi_syn).stage("shap_distance")?;
        let mad = mean_abs_attribution_diff(&self.phi_real, &phi_syn).stage("shap_distance")?;
        let tstr = accuracy(&model_syn, &self.real_test).stage("accuracy")?;

        let mut warnings = self.model_transform.warnings.clone();
        for w in &self.raw_transform.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }

        let report = AuditReport {
            shap_distance: d_shap,
            mean_abs_attribution_diff: mad,
            per_feature_kl,
            pca,
            gaps,
            accuracy: AccuracySummary {
                trtr: self.trtr,
                tstr,
                base_rate: self.base_rate,
            },
            attribution: AttributionSummary {
                aggregation: cfg.aggregation,
                feature_names: self.phi_real.feature_names.clone(),
                phi_real: self.phi_real.phi.clone(),
                phi_syn: phi_syn.phi.clone(),
                explained_rows: self.attributions_real.n_rows,
                base_value_real: self.attributions_real.base_value,
                base_value_syn: attributions_syn.base_value,
                max_local_accuracy_error_real: self.real_local_error,
                max_local_accuracy_error_syn: syn_local_error,
            },
            rows: RowCounts {
                real: self.real_rows,
                syn: syn.row_count(),
                real_train: self.real_train_rows,
                real_test: self.real_test.row_count(),
                syn_train: syn_train.row_count(),
            },
            warnings,
            provenance: Provenance {
                master_seed: cfg.master_seed,
                stage_seeds: SEED_STAGES.iter().map(|s| (String::from(*s), cfg.stage_seed(s))).collect(),
                config_digest: cfg.digest(),
                real_digest: self.real_digest.clone(),
                syn_digest: syn.digest(),
            },
        };
        Ok(AuditOutcome {
            report,
            model_real: self.model_real.clone(),
            model_syn,
            attributions_real: self.attributions_real.clone(),
            attributions_syn,
            real_raw: self.real_raw.clone(),
            syn_raw,
            real_model: self.real_model.clone(),
            syn_model,
        })
    }
}

/// One-shot audit of `syn` against `real`.
pub fn audit(real: &Table, syn: &Table, config: &AuditConfig) -> Result<AuditReport> {
    Ok(Auditor::new(real, config)?.evaluate(syn)?.report)
}
