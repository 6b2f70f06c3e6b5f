use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::schema::{is_missing_token, parse_number, ColumnKind, ColumnRole, ColumnSchema, RawTable};
use crate::digest::Fingerprint;
use crate::{Error, Result};

/// Code used for a missing categorical cell.
pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// `NaN` marks a missing cell.
    Numeric(Vec<f64>),
    /// Codes index into `levels`; [`MISSING_CODE`] marks a missing cell.
    Coded { codes: Vec<u32>, levels: Vec<String> },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Coded { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing_count(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.iter().filter(|x| x.is_nan()).count(),
            ColumnData::Coded { codes, .. } => codes.iter().filter(|&&c| c == MISSING_CODE).count(),
        }
    }

    /// Cell `i` as a real number: the value itself, or the category code.
    pub fn value(&self, i: usize) -> f64 {
        match self {
            ColumnData::Numeric(v) => v[i],
            ColumnData::Coded { codes, .. } if codes[i] == MISSING_CODE => f64::NAN,
            ColumnData::Coded { codes, .. } => f64::from(codes[i]),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Coded { codes, levels } => ColumnData::Coded {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                levels: levels.clone(),
            },
        }
    }

    fn storage_name(&self) -> &'static str {
        match self {
            ColumnData::Numeric(_) => "numeric",
            ColumnData::Coded { .. } => "coded",
        }
    }
}

/// Row-major dense feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// Immutable typed columnar table with exactly one target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
    row_count: usize,
}

impl Table {
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<ColumnData>) -> Result<Self> {
        ColumnSchema::validate_all(&schema)?;
        if schema.len() != columns.len() {
            return Err(Error::LengthMismatch(schema.len(), columns.len()));
        }
        let row_count = columns.first().map_or(0, ColumnData::len);
        for (col, data) in schema.iter().zip(&columns) {
            if data.len() != row_count {
                return Err(Error::ColumnLength {
                    expected: row_count,
                    found: data.len(),
                });
            }
            let storage_ok = match data {
                ColumnData::Numeric(_) => col.kind == ColumnKind::Numeric,
                ColumnData::Coded { .. } => col.kind.is_coded(),
            };
            if !storage_ok {
                return Err(Error::KindMismatch {
                    column: col.name.clone(),
                    expected: col.kind.as_str(),
                    found: data.storage_name(),
                });
            }
            if let ColumnData::Coded { codes, levels } = data {
                if let Some(&bad) = codes
                    .iter()
                    .find(|&&c| c != MISSING_CODE && c as usize >= levels.len())
                {
                    return Err(Error::CodeOutOfRange {
                        column: col.name.clone(),
                        code: bad,
                    });
                }
            }
        }
        Ok(Self {
            schema,
            columns,
            row_count,
        })
    }

    /// Types the raw cells with `schema`. Header columns not named by the
    /// schema are dropped; unparseable numeric cells become missing. Levels
    /// of coded columns are sorted numerically when every level is a number,
    /// lexicographically otherwise.
    pub fn from_raw(raw: &RawTable, schema: &[ColumnSchema]) -> Result<Self> {
        ColumnSchema::validate_all(schema)?;
        let mut columns = Vec::with_capacity(schema.len());
        for col in schema {
            let idx = raw
                .column_index(&col.name)
                .ok_or_else(|| match col.role {
                    ColumnRole::Target => Error::TargetAbsent,
                    ColumnRole::Feature => Error::MissingColumn(col.name.clone()),
                })?;
            let data = if col.kind == ColumnKind::Numeric {
                ColumnData::Numeric(
                    raw.cells(idx)
                        .map(|c| {
                            if is_missing_token(c) {
                                f64::NAN
                            } else {
                                parse_number(c).unwrap_or(f64::NAN)
                            }
                        })
                        .collect(),
                )
            } else {
                intern(raw.cells(idx))
            };
            columns.push(data);
        }
        Self::new(schema.to_vec(), columns)
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &ColumnData {
        &self.columns[i]
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.schema
            .iter()
            .position(|c| c.role == ColumnRole::Target)
            .expect("validated schema has a target")
    }

    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&i| self.schema[i].role == ColumnRole::Feature)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.schema[i].name.clone())
            .collect()
    }

    /// Target as 0/1 labels; code 1 is the positive class.
    pub fn target_labels(&self) -> Result<Vec<u8>> {
        let t = self.target_index();
        let name = &self.schema[t].name;
        match &self.columns[t] {
            ColumnData::Coded { codes, levels } => {
                if levels.len() > 2 {
                    return Err(Error::NonBinaryTarget(name.clone()));
                }
                codes
                    .iter()
                    .map(|&c| match c {
                        MISSING_CODE => Err(Error::MissingTarget(name.clone())),
                        c => Ok(c as u8),
                    })
                    .collect()
            }
            ColumnData::Numeric(_) => Err(Error::NonBinaryTarget(name.clone())),
        }
    }

    /// Dense features in schema order. Fails on any missing cell.
    pub fn feature_matrix(&self) -> Result<FeatureMatrix> {
        let features = self.feature_indices();
        if features.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        for &j in &features {
            if self.columns[j].missing_count() > 0 {
                return Err(Error::MissingValues(self.schema[j].name.clone()));
            }
        }
        let cols = features.len();
        let mut data = Vec::with_capacity(self.row_count * cols);
        for i in 0..self.row_count {
            data.extend(features.iter().map(|&j| self.columns[j].value(i)));
        }
        Ok(FeatureMatrix {
            data,
            rows: self.row_count,
            cols,
        })
    }

    /// Rows in the given order (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            row_count: rows.len(),
        }
    }

    pub fn with_column(&self, index: usize, data: ColumnData) -> Result<Table> {
        let mut columns = self.columns.clone();
        columns[index] = data;
        Table::new(self.schema.clone(), columns)
    }

    /// Cell as text: shortest round-trip decimal for numerics, the level for
    /// coded cells, empty when missing.
    pub fn cell_text(&self, row: usize, col: usize) -> String {
        use alloc::string::ToString;
        match &self.columns[col] {
            ColumnData::Numeric(v) if v[row].is_nan() => String::new(),
            ColumnData::Numeric(v) => v[row].to_string(),
            ColumnData::Coded { codes, .. } if codes[row] == MISSING_CODE => String::new(),
            ColumnData::Coded { codes, levels } => levels[codes[row] as usize].clone(),
        }
    }

    pub fn digest(&self) -> String {
        let mut fp = Fingerprint::new("table/v1");
        fp.u64(self.row_count as u64).u64(self.schema.len() as u64);
        for (col, data) in self.schema.iter().zip(&self.columns) {
            fp.str(&col.name).str(col.kind.as_str()).str(col.role.as_str());
            match data {
                ColumnData::Numeric(v) => {
                    for &x in v {
                        fp.f64(x);
                    }
                }
                ColumnData::Coded { codes, levels } => {
                    fp.u64(levels.len() as u64);
                    for l in levels {
                        fp.str(l);
                    }
                    for &c in codes {
                        fp.u64(u64::from(c));
                    }
                }
            }
        }
        fp.hex()
    }
}

fn intern<'a>(cells: impl Iterator<Item = &'a str> + Clone) -> ColumnData {
    let mut distinct: Vec<&str> = cells
        .clone()
        .filter(|c| !is_missing_token(c))
        .map(str::trim)
        .collect();
    let numeric = distinct.iter().all(|c| parse_number(c).is_some());
    if numeric {
        distinct.sort_by(|a, b| {
            parse_number(a)
                .unwrap()
                .total_cmp(&parse_number(b).unwrap())
                .then(a.cmp(b))
        });
    } else {
        distinct.sort_unstable();
    }
    distinct.dedup();
    let lookup: BTreeMap<&str, u32> = distinct
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect();
    let codes = cells
        .map(|c| {
            if is_missing_token(c) {
                MISSING_CODE
            } else {
                lookup[c.trim()]
            }
        })
        .collect();
    ColumnData::Coded {
        codes,
        levels: distinct.into_iter().map(String::from).collect(),
    }
}
