//! TOML run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shapaudit_core::attribution::Aggregation;
use shapaudit_core::dataset::{Encoding, Normalization, PreprocessSpec};
use shapaudit_core::digest::Fingerprint;
use shapaudit_core::metrics::{AuditConfig, KlConfig, UndersampleStage};
use shapaudit_core::model::TrainConfig;
use shapaudit_core::refine::{GeneratorKind, RefineConfig};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    /// `label` or `one_hot`.
    pub encoding: String,
    /// `none`, `min_max` or `z_score`.
    pub normalization: String,
    pub undersample: bool,
    /// `before_split` or `after_split`.
    pub undersample_stage: String,
    pub test_fraction: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            encoding: "label".into(),
            normalization: "none".into(),
            undersample: true,
            undersample_stage: UndersampleStage::BeforeSplit.as_str().into(),
            test_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub num_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_child_cover: usize,
    pub l2_regularization: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            num_rounds: t.num_rounds,
            max_depth: t.max_depth,
            learning_rate: t.learning_rate,
            min_child_cover: t.min_child_cover,
            l2_regularization: t.l2_regularization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub kl_bins: usize,
    pub kl_epsilon: f64,
    pub pca_components: usize,
    /// `mean_abs` or `mean_signed`.
    pub aggregation: String,
    pub max_explain_rows: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let kl = KlConfig::default();
        Self {
            kl_bins: kl.bins,
            kl_epsilon: kl.epsilon,
            pca_components: 2,
            aggregation: Aggregation::MeanAbs.as_str().into(),
            max_explain_rows: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefineSection {
    /// `marginal_resampler` or `gaussian_copula`.
    pub generator: String,
    pub epsilon: f64,
    pub max_iters: usize,
    pub top_k: usize,
    pub delta: f64,
    /// Defaults to the real row count.
    pub sample_count: Option<usize>,
    /// Starting emphasis per column.
    pub emphasis: BTreeMap<String, f64>,
}

impl Default for RefineSection {
    fn default() -> Self {
        let r = RefineConfig::default();
        Self {
            generator: GeneratorKind::MarginalResampler.as_str().into(),
            epsilon: r.epsilon,
            max_iters: r.max_iters,
            top_k: r.top_k,
            delta: r.delta,
            sample_count: None,
            emphasis: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub real_path: Option<PathBuf>,
    pub syn_path: Option<PathBuf>,
    pub schema_path: Option<PathBuf>,
    /// Target column; inferred when absent.
    pub target: Option<String>,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    pub preprocess: PreprocessSection,
    pub train: TrainSection,
    pub metrics: MetricsSection,
    pub refine: RefineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            real_path: None,
            syn_path: None,
            schema_path: None,
            target: None,
            output_dir: PathBuf::from("out"),
            master_seed: 0,
            preprocess: PreprocessSection::default(),
            train: TrainSection::default(),
            metrics: MetricsSection::default(),
            refine: RefineSection::default(),
        }
    }
}

fn config_err(msg: impl std::fmt::Display) -> AppError {
    AppError::Config(msg.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(config_err)
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut cfg.real_path, &mut cfg.syn_path, &mut cfg.schema_path].into_iter().flatten() {
            rebase(p);
        }
        rebase(&mut cfg.output_dir);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> AppResult<String> {
        toml::to_string(self).map_err(config_err)
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn digest(&self) -> AppResult<String> {
        let mut fp = Fingerprint::new("run-config/v1");
        fp.str(&self.to_toml()?);
        Ok(fp.hex())
    }

    pub fn audit_config(&self) -> AppResult<AuditConfig> {
        let p = &self.preprocess;
        let encoding = match p.encoding.as_str() {
            "label" => Encoding::Label,
            "one_hot" => Encoding::OneHot,
            other => return Err(config_err(format!("unknown encoding `{other}`"))),
        };
        let normalization = match p.normalization.as_str() {
            "none" => Normalization::None,
            "min_max" => Normalization::MinMax,
            "z_score" => Normalization::ZScore,
            other => return Err(config_err(format!("unknown normalization `{other}`"))),
        };
        let undersample_stage = UndersampleStage::parse(&p.undersample_stage)
            .ok_or_else(|| config_err(format!("unknown undersample_stage `{}`", p.undersample_stage)))?;
        let aggregation = Aggregation::parse(&self.metrics.aggregation)
            .ok_or_else(|| config_err(format!("unknown aggregation `{}`", self.metrics.aggregation)))?;
        let t = &self.train;
        let cfg = AuditConfig {
            preprocess: PreprocessSpec {
                encoding,
                normalization,
                undersample: p.undersample,
            },
            undersample_stage,
            train: TrainConfig {
                num_rounds: t.num_rounds,
                max_depth: t.max_depth,
                learning_rate: t.learning_rate,
                min_child_cover: t.min_child_cover,
                l2_regularization: t.l2_regularization,
                seed: 0,
            },
            kl: KlConfig {
                bins: self.metrics.kl_bins,
                epsilon: self.metrics.kl_epsilon,
            },
            pca_components: self.metrics.pca_components,
            aggregation,
            test_fraction: p.test_fraction,
            max_explain_rows: self.metrics.max_explain_rows,
            master_seed: self.master_seed,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }

    pub fn generator_kind(&self) -> AppResult<GeneratorKind> {
        GeneratorKind::parse(&self.refine.generator)
            .ok_or_else(|| config_err(format!("unknown generator `{}`", self.refine.generator)))
    }

    pub fn refine_config(&self) -> AppResult<RefineConfig> {
        let r = &self.refine;
        let cfg = RefineConfig {
            epsilon: r.epsilon,
            max_iters: r.max_iters,
            top_k: r.top_k,
            delta: r.delta,
        };
        cfg.validate().map_err(config_err)?;
        for (name, w) in &r.emphasis {
            if !(0.0..=1.0).contains(w) {
                return Err(config_err(format!("emphasis for `{name}` is {w}, outside [0, 1]")));
            }
        }
        if r.sample_count == Some(0) {
            return Err(config_err("sample_count must be at least 1"));
        }
        Ok(cfg)
    }
}
