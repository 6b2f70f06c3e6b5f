//! CSV tables and schema override files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;
use shapaudit_core::dataset::{infer_schema, ColumnKind, ColumnRole, ColumnSchema, RawTable, Table};

use crate::error::{AppError, AppResult};

/// Reads an RFC-4180 CSV with a header row. Blank lines are skipped.
pub fn read_raw<R: Read>(reader: R) -> Result<RawTable, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let headers: Vec<String> = match records.next() {
        None => Vec::new(),
        Some(r) => r.map_err(|e| e.to_string())?.iter().map(|h| h.trim().to_string()).collect(),
    };
    let rows = records
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| e.to_string())?;
    RawTable::new(headers, rows).map_err(|e| e.to_string())
}

pub fn read_raw_file(path: &Path) -> AppResult<RawTable> {
    let file = File::open(path).map_err(|e| AppError::input(path, e))?;
    read_raw(file).map_err(|e| AppError::input(path, e))
}

/// Loads a CSV, typing it with `schema` when given and by inference
/// otherwise. `target` names the target column for inference.
pub fn load_csv(path: &Path, schema: Option<&[ColumnSchema]>, target: Option<&str>) -> AppResult<Table> {
    let raw = read_raw_file(path)?;
    let schema = match schema {
        Some(s) => s.to_vec(),
        None => infer_schema(&raw, target).map_err(|e| AppError::input(path, e))?,
    };
    Table::from_raw(&raw, &schema).map_err(|e| AppError::input(path, e))
}

pub fn write_table<W: Write>(table: &Table, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.schema().iter().map(|c| c.name.as_str()))?;
    for row in 0..table.row_count() {
        w.write_record((0..table.schema().len()).map(|col| table.cell_text(row, col)))?;
    }
    w.flush()
}

pub fn save_table(table: &Table, path: &Path) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::output(path, e))?;
    write_table(table, std::io::BufWriter::new(file)).map_err(|e| AppError::output(path, e))
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ColumnOverride {
    pub kind: Option<String>,
    pub role: Option<String>,
}

/// Parsed schema override file: column name → `{kind, role}`, either
/// field optional.
pub type SchemaOverrides = BTreeMap<String, ColumnOverride>;

pub fn parse_overrides(text: &str) -> Result<SchemaOverrides, String> {
    let map: SchemaOverrides = serde_json::from_str(text).map_err(|e| e.to_string())?;
    for (name, o) in &map {
        if let Some(k) = &o.kind {
            ColumnKind::parse(k).ok_or_else(|| format!("column `{name}`: unknown kind `{k}`"))?;
        }
        if let Some(r) = &o.role {
            ColumnRole::parse(r).ok_or_else(|| format!("column `{name}`: unknown role `{r}`"))?;
        }
    }
    Ok(map)
}

pub fn load_overrides(path: &Path) -> AppResult<SchemaOverrides> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::input(path, e))?;
    parse_overrides(&text).map_err(|e| AppError::input(path, e))
}

/// Infers a schema and applies `overrides` on top. A column overridden to
/// the target role replaces the inferred target.
pub fn resolve_schema(raw: &RawTable, overrides: &SchemaOverrides, target: Option<&str>) -> Result<Vec<ColumnSchema>, String> {
    for name in overrides.keys() {
        if raw.column_index(name).is_none() {
            return Err(format!("schema override names unknown column `{name}`"));
        }
    }
    let targets: Vec<&str> = overrides
        .iter()
        .filter(|(_, o)| o.role.as_deref() == Some("target"))
        .map(|(n, _)| n.as_str())
        .collect();
    let target = match (targets.as_slice(), target) {
        ([], t) => t,
        ([one], None) => Some(*one),
        ([one], Some(t)) if *one == t => Some(t),
        _ => return Err("conflicting target columns".into()),
    };
    let mut schema = infer_schema(raw, target).map_err(|e| e.to_string())?;
    for col in &mut schema {
        if let Some(o) = overrides.get(&col.name) {
            if let Some(k) = o.kind.as_deref().and_then(ColumnKind::parse) {
                col.kind = k;
            }
            if let Some(r) = o.role.as_deref().and_then(ColumnRole::parse) {
                col.role = r;
            }
        }
    }
    ColumnSchema::validate_all(&schema).map_err(|e| e.to_string())?;
    Ok(schema)
}
