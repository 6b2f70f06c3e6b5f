//! Baseline generators with per-feature emphasis.
//!
//! Every sampled row starts from a target value produced by the generator's
//! default mechanism and an anchor: a uniformly drawn real row with that
//! target. Feature `k` copies the anchor's cell with probability `w_k` and
//! otherwise falls back to the default mechanism (an independent column
//! bootstrap for the resampler, the copula draw for the copula).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{impute_missing, ColumnData, ColumnSchema, Table};
use crate::digest::Fingerprint;
use crate::linalg::{cholesky, repair_correlation};
use crate::math::{floor, normal_cdf, normal_quantile};
use crate::metrics::average_ranks;
use crate::seed::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorKind {
    #[default]
    MarginalResampler,
    GaussianCopula,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MarginalResampler => "marginal_resampler",
            Self::GaussianCopula => "gaussian_copula",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "marginal_resampler" => Some(Self::MarginalResampler),
            "gaussian_copula" => Some(Self::GaussianCopula),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Column name → weight in [0, 1]. Columns not listed have weight 0.
    pub emphasis: BTreeMap<String, f64>,
    pub seed: u64,
    pub sample_count: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64, sample_count: usize) -> Self {
        Self {
            kind,
            emphasis: BTreeMap::new(),
            seed,
            sample_count,
        }
    }

    pub fn weight(&self, column: &str) -> f64 {
        self.emphasis.get(column).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter(String::from("sample_count must be at least 1")));
        }
        for (name, &w) in &self.emphasis {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter(format!("emphasis for `{name}` is {w}, outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let mut fp = Fingerprint::new("generator-spec/v1");
        fp.str(self.kind.as_str()).u64(self.seed).u64(self.sample_count as u64);
        fp.u64(self.emphasis.len() as u64);
        for (name, &w) in &self.emphasis {
            fp.str(name).f64(w);
        }
        fp.hex()
    }
}

/// Per-column Gaussian copula state.
#[derive(Debug, Clone, PartialEq)]
pub struct Copula {
    /// Correlation of the normal scores after repair, row-major.
    pub correlation: Vec<f64>,
    cholesky: Vec<f64>,
    /// Sorted real cell values (category codes for coded columns).
    sorted: Vec<Vec<f64>>,
    /// Columns excluded from the copula because their scores are constant.
    independent: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Generator {
    kind: GeneratorKind,
    source: Table,
    weights: Vec<f64>,
    target: usize,
    rows_by_class: BTreeMap<u64, Vec<usize>>,
    copula: Option<Copula>,
    warnings: Vec<String>,
}

fn cell_key(col: &ColumnData, i: usize) -> u64 {
    col.value(i).to_bits()
}

pub fn fit_generator(real: &Table, spec: &GeneratorSpec) -> Result<Generator> {
    spec.validate()?;
    if real.row_count() == 0 {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    for name in spec.emphasis.keys() {
        if real.column_index(name).is_none() {
            return Err(Error::MissingColumn(name.clone()));
        }
    }
    let source = impute_missing(real)?;
    if source.row_count() == 0 {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let target = source.target_index();
    let weights = source.schema().iter().map(|c| spec.weight(&c.name)).collect();
    let mut rows_by_class: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for i in 0..source.row_count() {
        rows_by_class.entry(cell_key(source.column(target), i)).or_default().push(i);
    }
    let mut warnings = Vec::new();
    let copula = match spec.kind {
        GeneratorKind::MarginalResampler => None,
        GeneratorKind::GaussianCopula => Some(fit_copula(&source, &mut warnings)),
    };
    Ok(Generator {
        kind: spec.kind,
        source,
        weights,
        target,
        rows_by_class,
        copula,
        warnings,
    })
}

fn fit_copula(source: &Table, warnings: &mut Vec<String>) -> Copula {
    let n = source.row_count();
    let d = source.columns().len();
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut independent = vec![false; d];
    let mut sorted = Vec::with_capacity(d);
    for (j, (col, data)) in source.schema().iter().zip(source.columns()).enumerate() {
        let values = data.values();
        let z: Vec<f64> = average_ranks(&values)
            .into_iter()
            .map(|r| normal_quantile(r / (n as f64 + 1.0)))
            .collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = z.iter().map(|v| v - mean).collect();
        let var: f64 = centered.iter().map(|v| v * v).sum();
        if !(var > 0.0) {
            independent[j] = true;
            warnings.push(format!("column `{}` is constant; sampled independently of the copula", col.name));
        }
        let mut s = values;
        s.sort_by(f64::total_cmp);
        sorted.push(s);
        scores.push(centered);
    }
    let mut corr = vec![0.0; d * d];
    for a in 0..d {
        corr[a * d + a] = 1.0;
        if independent[a] {
            continue;
        }
        for b in a + 1..d {
            if independent[b] {
                continue;
            }
            let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
            for (x, y) in scores[a].iter().zip(&scores[b]) {
                sab += x * y;
                saa += x * x;
                sbb += y * y;
            }
            let r = (sab / crate::math::sqrt(saa * sbb)).clamp(-1.0, 1.0);
            corr[a * d + b] = r;
            corr[b * d + a] = r;
        }
    }
    let chol = match cholesky(&corr, d) {
        Some(l) => l,
        None => {
            warnings.push(String::from("copula correlation was not positive definite; repaired"));
            corr = repair_correlation(&corr, d, 1e-8);
            cholesky(&corr, d).expect("repaired matrix is positive definite")
        }
    };
    Copula {
        correlation: corr,
        cholesky: chol,
        sorted,
        independent,
    }
}

impl Generator {
    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn copula(&self) -> Option<&Copula> {
        self.copula.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Draws `m` rows with the schema and category levels of the fitted table.
    pub fn sample(&self, m: usize, seed: u64) -> Result<Table> {
        if m == 0 {
            return Err(Error::InvalidParameter(String::from("sample size must be at least 1")));
        }
        let mut r = rng(seed);
        let n = self.source.row_count();
        let cols = self.source.columns();
        let d = cols.len();
        let mut cells: Vec<Vec<f64>> = vec![Vec::with_capacity(m); d];
        let mut z = vec![0.0; d];
        let mut copula_row = vec![0.0; d];
        for _ in 0..m {
            let boot = r.random_range(0..n);
            if let Some(c) = &self.copula {
                for v in z.iter_mut() {
                    *v = r.sample(StandardNormal);
                }
                for i in 0..d {
                    let zi: f64 = (0..=i).map(|k| c.cholesky[i * d + k] * z[k]).sum();
                    let s = &c.sorted[i];
                    copula_row[i] = if c.independent[i] {
                        s[r.random_range(0..n)]
                    } else {
                        let u = normal_cdf(zi);
                        s[(floor(u * n as f64) as usize).min(n - 1)]
                    };
                }
            }
            let target_key = match &self.copula {
                Some(_) => copula_row[self.target].to_bits(),
                None => cell_key(&cols[self.target], boot),
            };
            let anchor = match &self.copula {
                None => boot,
                Some(_) => {
                    let rows = &self.rows_by_class[&target_key];
                    rows[r.random_range(0..rows.len())]
                }
            };
            for (j, data) in cols.iter().enumerate() {
                if j == self.target {
                    cells[j].push(f64::from_bits(target_key));
                    continue;
                }
                let w = self.weights[j];
                let coupled = w >= 1.0 || (w > 0.0 && r.random_bool(w));
                if coupled {
                    cells[j].push(data.value(anchor));
                } else if self.copula.is_some() {
                    cells[j].push(copula_row[j]);
                } else {
                    cells[j].push(data.value(r.random_range(0..n)));
                }
            }
        }
        let columns = cols
            .iter()
            .zip(cells)
            .map(|(data, v)| match data {
                ColumnData::Numeric(_) => ColumnData::Numeric(v),
                ColumnData::Coded { levels, .. } => ColumnData::Coded {
                    codes: v.into_iter().map(|x| x as u32).collect(),
                    levels: levels.clone(),
                },
            })
            .collect();
        Table::new(self.source.schema().to_vec(), columns)
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        self.source.schema()
    }
}
