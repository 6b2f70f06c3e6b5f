use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::schema::{ColumnKind, ColumnRole, ColumnSchema};
use super::table::{ColumnData, Table, MISSING_CODE};
use crate::math::sqrt;
use crate::{Error, Result};

/// Level appended to every label-encoded feature; receives categories that
/// were not present in the fitting table.
pub const UNKNOWN_LEVEL: &str = "<unknown>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    #[default]
    Label,
    OneHot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    MinMax,
    ZScore,
}

/// Imputation is fixed to median (numeric) and mode (coded).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessSpec {
    pub encoding: Encoding,
    pub normalization: Normalization,
    pub undersample: bool,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        Self {
            encoding: Encoding::Label,
            normalization: Normalization::None,
            undersample: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnTransform {
    /// Output is `(x - offset) / scale` after imputation.
    Numeric { impute: f64, offset: f64, scale: f64 },
    Coded { levels: Vec<String>, impute_code: u32 },
}

/// Imputation values, dictionaries and scaling fitted on the real table.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedTransform {
    pub schema: Vec<ColumnSchema>,
    pub columns: Vec<ColumnTransform>,
    pub encoding: Encoding,
    pub normalization: Normalization,
    pub warnings: Vec<String>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Most frequent code; ties go to the lowest code.
fn mode(codes: &[u32]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in codes.iter().filter(|&&c| c != MISSING_CODE) {
        *counts.entry(c).or_default() += 1;
    }
    let mut best: Option<(u32, usize)> = None;
    for (c, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((c, n));
        }
    }
    best.map(|(c, _)| c)
}

pub fn fit_transform(real: &Table, spec: &PreprocessSpec) -> Result<FittedTransform> {
    if real.row_count() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: real.row_count(),
        });
    }
    let mut warnings = Vec::new();
    let mut columns = Vec::with_capacity(real.schema().len());
    for (col, data) in real.schema().iter().zip(real.columns()) {
        let t = match data {
            ColumnData::Numeric(v) => {
                let mut present: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
                if present.is_empty() {
                    return Err(Error::AllMissing(col.name.clone()));
                }
                let impute = median(&mut present);
                let (offset, scale) = if col.role == ColumnRole::Target {
                    (0.0, 1.0)
                } else {
                    scaling(&present, spec.normalization, &col.name, &mut warnings)
                };
                ColumnTransform::Numeric {
                    impute,
                    offset,
                    scale,
                }
            }
            ColumnData::Coded { codes, levels } => {
                let impute_code = mode(codes).ok_or_else(|| Error::AllMissing(col.name.clone()))?;
                if col.role == ColumnRole::Target {
                    let present = codes
                        .iter()
                        .filter(|&&c| c != MISSING_CODE)
                        .collect::<alloc::collections::BTreeSet<_>>();
                    if levels.len() > 2 {
                        return Err(Error::NonBinaryTarget(col.name.clone()));
                    }
                    if present.len() < 2 {
                        return Err(Error::DegenerateTarget);
                    }
                }
                ColumnTransform::Coded {
                    levels: levels.clone(),
                    impute_code,
                }
            }
        };
        columns.push(t);
    }
    let target = real.target_index();
    if matches!(real.column(target), ColumnData::Numeric(_)) {
        return Err(Error::NonBinaryTarget(real.schema()[target].name.clone()));
    }
    Ok(FittedTransform {
        schema: real.schema().to_vec(),
        columns,
        encoding: spec.encoding,
        normalization: spec.normalization,
        warnings,
    })
}

fn scaling(
    present: &[f64],
    normalization: Normalization,
    name: &str,
    warnings: &mut Vec<String>,
) -> (f64, f64) {
    match normalization {
        Normalization::None => (0.0, 1.0),
        Normalization::MinMax => {
            let min = present.iter().copied().fold(f64::INFINITY, f64::min);
            let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = max - min;
            if range > 0.0 {
                (min, range)
            } else {
                warnings.push(format!("column `{name}` is constant; min-max scale set to 1"));
                (min, 1.0)
            }
        }
        Normalization::ZScore => {
            let n = present.len() as f64;
            let mean = present.iter().sum::<f64>() / n;
            let var = if present.len() > 1 {
                present.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            if var > 0.0 {
                (mean, sqrt(var))
            } else {
                warnings.push(format!("column `{name}` is constant; z-score scale set to 1"));
                (mean, 1.0)
            }
        }
    }
}

impl FittedTransform {
    pub fn feature_names(&self) -> Vec<String> {
        self.schema
            .iter()
            .filter(|c| c.role == ColumnRole::Feature)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn target_name(&self) -> &str {
        &self
            .schema
            .iter()
            .find(|c| c.role == ColumnRole::Target)
            .expect("fitted on a validated schema")
            .name
    }
}

/// Applies `t` to `table`, matching columns by name.
///
/// Rows whose target is missing are dropped. Unseen feature categories map to
/// [`UNKNOWN_LEVEL`]; scaled values are never clamped.
pub fn apply_transform(table: &Table, t: &FittedTransform) -> Result<Table> {
    let sources: Vec<usize> = t
        .schema
        .iter()
        .map(|c| {
            table.column_index(&c.name).ok_or_else(|| match c.role {
                ColumnRole::Target => Error::TargetAbsent,
                ColumnRole::Feature => Error::MissingColumn(c.name.clone()),
            })
        })
        .collect::<Result<_>>()?;

    let target_pos = t
        .schema
        .iter()
        .position(|c| c.role == ColumnRole::Target)
        .expect("validated schema");
    let target_codes = remap_target(table.column(sources[target_pos]), &t.columns[target_pos], &t.schema[target_pos].name)?;
    let keep: Vec<usize> = (0..table.row_count())
        .filter(|&i| target_codes[i] != MISSING_CODE)
        .collect();

    let mut schema = Vec::new();
    let mut columns = Vec::new();
    for ((col, ct), &src) in t.schema.iter().zip(&t.columns).zip(&sources) {
        let data = table.column(src);
        match (ct, data) {
            (ColumnTransform::Numeric { impute, offset, scale }, ColumnData::Numeric(v)) => {
                let scaled = col.role == ColumnRole::Feature && t.normalization != Normalization::None;
                let out = keep
                    .iter()
                    .map(|&i| {
                        let x = if v[i].is_nan() { *impute } else { v[i] };
                        if scaled {
                            (x - offset) / scale
                        } else {
                            x
                        }
                    })
                    .collect();
                schema.push(col.clone());
                columns.push(ColumnData::Numeric(out));
            }
            (ColumnTransform::Coded { levels, .. }, ColumnData::Coded { .. }) if col.role == ColumnRole::Target => {
                schema.push(col.clone());
                columns.push(ColumnData::Coded {
                    codes: keep.iter().map(|&i| target_codes[i]).collect(),
                    levels: levels.clone(),
                });
            }
            (ColumnTransform::Coded { levels, impute_code }, ColumnData::Coded { codes, levels: src_levels }) => {
                let unknown = levels.len() as u32;
                let lookup: BTreeMap<&str, u32> = levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i as u32))
                    .collect();
                let map: Vec<u32> = src_levels
                    .iter()
                    .map(|l| lookup.get(l.as_str()).copied().unwrap_or(unknown))
                    .collect();
                let mapped: Vec<u32> = keep
                    .iter()
                    .map(|&i| match codes[i] {
                        MISSING_CODE => *impute_code,
                        c => map[c as usize],
                    })
                    .collect();
                match t.encoding {
                    Encoding::Label => {
                        let mut out_levels = levels.clone();
                        out_levels.push(String::from(UNKNOWN_LEVEL));
                        schema.push(col.clone());
                        columns.push(ColumnData::Coded {
                            codes: mapped,
                            levels: out_levels,
                        });
                    }
                    Encoding::OneHot => {
                        for (li, level) in levels.iter().enumerate() {
                            schema.push(ColumnSchema::feature(
                                format!("{}={}", col.name, level),
                                ColumnKind::Numeric,
                            ));
                            columns.push(ColumnData::Numeric(
                                mapped
                                    .iter()
                                    .map(|&c| if c as usize == li { 1.0 } else { 0.0 })
                                    .collect(),
                            ));
                        }
                    }
                }
            }
            _ => {
                return Err(Error::KindMismatch {
                    column: col.name.clone(),
                    expected: col.kind.as_str(),
                    found: match data {
                        ColumnData::Numeric(_) => "numeric",
                        ColumnData::Coded { .. } => "coded",
                    },
                })
            }
        }
    }
    Table::new(schema, columns)
}

fn remap_target(data: &ColumnData, ct: &ColumnTransform, name: &str) -> Result<Vec<u32>> {
    let (ColumnData::Coded { codes, levels: src_levels }, ColumnTransform::Coded { levels, .. }) = (data, ct) else {
        return Err(Error::NonBinaryTarget(String::from(name)));
    };
    let map: Vec<Option<u32>> = src_levels
        .iter()
        .map(|l| levels.iter().position(|x| x == l).map(|p| p as u32))
        .collect();
    codes
        .iter()
        .map(|&c| match c {
            MISSING_CODE => Ok(MISSING_CODE),
            c => map[c as usize].ok_or_else(|| {
                Error::FeatureMismatch(format!(
                    "target level `{}` not present in the fitting table",
                    src_levels[c as usize]
                ))
            }),
        })
        .collect()
}

/// Median/mode imputation that keeps every column's storage and levels.
/// Rows with a missing target are dropped.
pub fn impute_missing(table: &Table) -> Result<Table> {
    let target = table.target_index();
    let keep: Vec<usize> = match table.column(target) {
        ColumnData::Coded { codes, .. } => (0..table.row_count()).filter(|&i| codes[i] != MISSING_CODE).collect(),
        ColumnData::Numeric(v) => (0..table.row_count()).filter(|&i| !v[i].is_nan()).collect(),
    };
    let table = table.select_rows(&keep);
    let mut columns = Vec::with_capacity(table.columns().len());
    for (col, data) in table.schema().iter().zip(table.columns()) {
        let out = match data {
            ColumnData::Numeric(v) => {
                let mut present: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
                if present.is_empty() {
                    return Err(Error::AllMissing(col.name.clone()));
                }
                let fill = median(&mut present);
                ColumnData::Numeric(v.iter().map(|&x| if x.is_nan() { fill } else { x }).collect())
            }
            ColumnData::Coded { codes, levels } => {
                let fill = mode(codes).ok_or_else(|| Error::AllMissing(col.name.clone()))?;
                ColumnData::Coded {
                    codes: codes.iter().map(|&c| if c == MISSING_CODE { fill } else { c }).collect(),
                    levels: levels.clone(),
                }
            }
        };
        columns.push(out);
    }
    Table::new(table.schema().to_vec(), columns)
}
