//! Subcommand dispatch. Inputs are loaded and validated before any file is
//! written, so a configuration or input failure leaves the output
//! directory untouched.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use shapaudit_core::dataset::{ColumnSchema, Table};
use shapaudit_core::metrics::{AuditConfig, AuditOutcome, Auditor};
use shapaudit_core::refine::{refine_loop, GeneratorSpec};
use shapaudit_core::seed::derive_seed;

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};
use crate::io::{load_overrides, read_raw_file, resolve_schema, write_table, SchemaOverrides};
use crate::{model_json, plots, report, selftest};

#[derive(Debug, Parser)]
#[command(name = "shapaudit", version, about = "Attribution-based fidelity audits for synthetic tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit a synthetic table against a real one.
    Audit(RunArgs),
    /// Run the attribution-guided generator refinement loop.
    Refine(RunArgs),
    /// Write density, PCA and top-k attribution data files.
    ExportPlots(RunArgs),
    /// Check TreeSHAP against subset enumeration and run an identity audit.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides `real_path`.
    #[arg(long)]
    pub real: Option<PathBuf>,
    /// Overrides `syn_path`.
    #[arg(long)]
    pub syn: Option<PathBuf>,
    /// Overrides `schema_path`.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Overrides `target`.
    #[arg(long)]
    pub target: Option<String>,
    /// Z-score features on the modelling path (KL and gaps stay on raw scales).
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random ensembles checked against subset enumeration.
    #[arg(long, default_value_t = 200)]
    pub ensembles: usize,
}

/// Fully resolved inputs of a run.
struct Prepared {
    run: RunConfig,
    audit: AuditConfig,
    real: Table,
    schema: Vec<ColumnSchema>,
    output: PathBuf,
}

fn require_file(path: &Option<PathBuf>, what: &str) -> AppResult<PathBuf> {
    let p = path.clone().ok_or_else(|| AppError::Config(format!("{what} is not set")))?;
    if !p.is_file() {
        return Err(AppError::input(&p, "file not found"));
    }
    Ok(p)
}

fn prepare(args: &RunArgs) -> AppResult<Prepared> {
    let mut run = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        run.master_seed = s;
    }
    if let Some(o) = &args.output {
        run.output_dir = o.clone();
    }
    if let Some(p) = &args.real {
        run.real_path = Some(p.clone());
    }
    if let Some(p) = &args.syn {
        run.syn_path = Some(p.clone());
    }
    if let Some(p) = &args.schema {
        run.schema_path = Some(p.clone());
    }
    if let Some(t) = &args.target {
        run.target = Some(t.clone());
    }
    if args.standardize {
        run.preprocess.normalization = "z_score".into();
    }
    let audit = run.audit_config()?;

    let real_path = require_file(&run.real_path, "real_path")?;
    let overrides = match &run.schema_path {
        Some(p) if !p.is_file() => return Err(AppError::input(p, "file not found")),
        Some(p) => load_overrides(p)?,
        None => SchemaOverrides::new(),
    };
    let raw = read_raw_file(&real_path)?;
    let schema = resolve_schema(&raw, &overrides, run.target.as_deref()).map_err(|e| AppError::input(&real_path, e))?;
    let real = Table::from_raw(&raw, &schema).map_err(|e| AppError::input(&real_path, e))?;
    Ok(Prepared {
        output: run.output_dir.clone(),
        run,
        audit,
        real,
        schema,
    })
}

fn load_syn(p: &Prepared) -> AppResult<Table> {
    let path = require_file(&p.run.syn_path, "syn_path")?;
    let raw = read_raw_file(&path)?;
    Table::from_raw(&raw, &p.schema).map_err(|e| AppError::input(&path, e))
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> AppResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| AppError::output(path, e))
}

fn make_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::output(dir, e))
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Timestamps live here and nowhere else, keeping every other output
/// byte-identical across reruns.
fn write_meta(dir: &Path, command: &str, run: &RunConfig, started: u128) -> AppResult<()> {
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "run_config_digest": run.digest()?,
        "master_seed": run.master_seed,
        "started_unix_ms": started as u64,
        "finished_unix_ms": unix_ms() as u64,
    });
    write(dir, "run_meta.json", format!("{meta:#}\n"))
}

fn audit_outcome(p: &Prepared) -> AppResult<AuditOutcome> {
    let syn = load_syn(p)?;
    Ok(Auditor::new(&p.real, &p.audit)?.evaluate(&syn)?)
}

pub fn cmd_audit(args: &RunArgs) -> AppResult<()> {
    let started = unix_ms();
    let p = prepare(args)?;
    let outcome = audit_outcome(&p)?;
    make_dir(&p.output)?;
    write(&p.output, "report.json", report::report_json(&outcome.report))?;
    write(&p.output, "attributions_real.csv", report::attributions_csv(&outcome.attributions_real))?;
    write(&p.output, "attributions_syn.csv", report::attributions_csv(&outcome.attributions_syn))?;
    write(&p.output, "shap_summary.json", report::shap_summary_json(&outcome.report, 10))?;
    write(&p.output, "model_real.json", model_json::to_json(&outcome.model_real))?;
    write(&p.output, "model_syn.json", model_json::to_json(&outcome.model_syn))?;
    write_meta(&p.output, "audit", &p.run, started)
}

pub fn cmd_refine(args: &RunArgs) -> AppResult<()> {
    let started = unix_ms();
    let p = prepare(args)?;
    let rc = p.run.refine_config()?;
    let spec = GeneratorSpec {
        kind: p.run.generator_kind()?,
        emphasis: p.run.refine.emphasis.clone(),
        seed: derive_seed(p.audit.master_seed, "generator"),
        sample_count: p.run.refine.sample_count.unwrap_or(p.real.row_count()),
    };
    for name in spec.emphasis.keys() {
        if p.real.column_index(name).is_none() {
            return Err(AppError::Config(format!("emphasis names unknown column `{name}`")));
        }
    }
    match refine_loop(&p.real, &spec, &rc, &p.audit) {
        Ok(out) => {
            make_dir(&p.output)?;
            let mut csv = Vec::new();
            write_table(&out.best_syn, &mut csv).map_err(|e| AppError::output(p.output.join("best_synthetic.csv"), e))?;
            write(&p.output, "best_synthetic.csv", csv)?;
            write(&p.output, "trace.jsonl", report::trace_jsonl(&out.trace))?;
            write(&p.output, "refine_summary.json", report::trace_summary_json(&out.trace))?;
            write(&p.output, "report.json", report::report_json(&out.best.report))?;
            write_meta(&p.output, "refine", &p.run, started)
        }
        Err(e) => {
            if !e.trace.iterations.is_empty() {
                make_dir(&p.output)?;
                write(&p.output, "trace.jsonl", report::trace_jsonl(&e.trace))?;
            }
            Err(AppError::Pipeline(e.error))
        }
    }
}

pub fn cmd_export_plots(args: &RunArgs) -> AppResult<()> {
    let started = unix_ms();
    let p = prepare(args)?;
    let outcome = audit_outcome(&p)?;
    let densities = plots::all_densities(&outcome, p.audit.kl.bins);
    let pca = plots::pca_points_csv(&outcome)?;
    make_dir(&p.output)?;
    let names: Vec<String> = densities.iter().map(|d| d.feature.clone()).collect();
    for (d, file) in densities.iter().zip(plots::density_file_names(&names)) {
        write(&p.output, &file, plots::density_csv(d))?;
    }
    write(&p.output, "pca_points.csv", pca)?;
    write(&p.output, "shap_topk.csv", plots::shap_topk_csv(&outcome, 10))?;
    write_meta(&p.output, "export-plots", &p.run, started)
}

pub fn cmd_selftest(args: &SelftestArgs) -> AppResult<bool> {
    let checks = selftest::run(args.ensembles, args.seed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Audit(a) => cmd_audit(a),
        Command::Refine(a) => cmd_refine(a),
        Command::ExportPlots(a) => cmd_export_plots(a),
        Command::Selftest(a) => match cmd_selftest(a) {
            Ok(true) => Ok(()),
            Ok(false) => return 1,
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("shapaudit: {e}");
            e.exit_code()
        }
    }
}
