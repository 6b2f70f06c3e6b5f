use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Binary,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "numeric" => Some(ColumnKind::Numeric),
            "categorical" => Some(ColumnKind::Categorical),
            "binary" => Some(ColumnKind::Binary),
            _ => None,
        }
    }

    /// Categorical and binary columns share the interned-code storage.
    pub fn is_coded(self) -> bool {
        !matches!(self, ColumnKind::Numeric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnRole {
    Feature,
    Target,
}

impl ColumnRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnRole::Feature => "feature",
            ColumnRole::Target => "target",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "feature" => Some(ColumnRole::Feature),
            "target" => Some(ColumnRole::Target),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: ColumnRole) -> Self {
        Self {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn feature(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self::new(name, kind, ColumnRole::Feature)
    }

    pub fn target(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self::new(name, kind, ColumnRole::Target)
    }

    /// Checks unique non-empty names and exactly one target.
    pub fn validate_all(schema: &[ColumnSchema]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for col in schema {
            if col.name.is_empty() {
                return Err(Error::EmptyColumnName);
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::DuplicateColumn(col.name.clone()));
            }
        }
        match schema.iter().filter(|c| c.role == ColumnRole::Target).count() {
            1 => Ok(()),
            0 => Err(Error::TargetAbsent),
            n => Err(Error::TargetCount(n)),
        }
    }
}

/// Empty cells and the literals `NA` and `?` are missing.
pub fn is_missing_token(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "NA" || t == "?"
}

/// Untyped rows as read from a delimited file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if headers.is_empty() {
            return Err(Error::NoHeader);
        }
        let mut seen = BTreeSet::new();
        for h in &headers {
            if h.is_empty() {
                return Err(Error::EmptyColumnName);
            }
            if !seen.insert(h.as_str()) {
                return Err(Error::DuplicateColumn(h.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != headers.len() {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: headers.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn cells(&self, col: usize) -> impl Iterator<Item = &str> + Clone + '_ {
        self.rows.iter().map(move |r| r[col].as_str())
    }
}

pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    let v: f64 = cell.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Infers a kind for every column and marks the target.
///
/// A column is numeric when every non-missing cell parses as a number and it
/// has more than two distinct values; binary when its distinct values are a
/// subset of `{0, 1}` or there are exactly two of them; categorical otherwise.
/// The target is `target` when given, else a column named `target`, else the
/// last column.
pub fn infer_schema(raw: &RawTable, target: Option<&str>) -> Result<Vec<ColumnSchema>> {
    if raw.rows.is_empty() {
        return Err(Error::NoRows);
    }
    let target_idx = match target {
        Some(name) => raw.column_index(name).ok_or(Error::TargetAbsent)?,
        None => raw
            .column_index("target")
            .unwrap_or(raw.headers.len() - 1),
    };

    raw.headers
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let kind = infer_kind(raw.cells(i)).ok_or_else(|| Error::AllMissing(name.clone()))?;
            let role = if i == target_idx {
                ColumnRole::Target
            } else {
                ColumnRole::Feature
            };
            Ok(ColumnSchema::new(name.clone(), kind, role))
        })
        .collect()
}

fn infer_kind<'a>(cells: impl Iterator<Item = &'a str>) -> Option<ColumnKind> {
    let mut distinct = BTreeSet::new();
    let mut all_numeric = true;
    for cell in cells.filter(|c| !is_missing_token(c)) {
        let cell = cell.trim();
        if all_numeric && parse_number(cell).is_none() {
            all_numeric = false;
        }
        if distinct.len() <= 2 || !all_numeric {
            distinct.insert(cell.to_string());
        }
    }
    if distinct.is_empty() {
        return None;
    }
    let zero_one = all_numeric
        && distinct.iter().all(|c| {
            let v = parse_number(c).unwrap();
            v == 0.0 || v == 1.0
        });
    Some(if all_numeric && distinct.len() > 2 {
        ColumnKind::Numeric
    } else if zero_one || distinct.len() == 2 {
        ColumnKind::Binary
    } else {
        ColumnKind::Categorical
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn raw(headers: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable::new(
            headers.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    fn kind_of(cells: &[&str]) -> Option<ColumnKind> {
        infer_kind(cells.iter().copied())
    }

    #[test]
    fn kinds_from_examples() {
        assert_eq!(kind_of(&["1.5", "2.0", "3.5"]), Some(ColumnKind::Numeric));
        assert_eq!(kind_of(&["0", "1", "1", "0"]), Some(ColumnKind::Binary));
        assert_eq!(kind_of(&["DSL", "Fiber", "No"]), Some(ColumnKind::Categorical));
        assert_eq!(kind_of(&["Yes", "No", "No"]), Some(ColumnKind::Binary));
        assert_eq!(kind_of(&["1", "?", "0", ""]), Some(ColumnKind::Binary));
        assert_eq!(kind_of(&["3", "4", "x", "5"]), Some(ColumnKind::Categorical));
        assert_eq!(kind_of(&["", "NA", "?"]), None);
    }

    #[test]
    fn all_missing_column_is_named() {
        let t = raw(&["a", "target"], &[&["", "0"], &["?", "1"]]);
        assert_eq!(infer_schema(&t, None), Err(Error::AllMissing("a".into())));
    }

    #[test]
    fn target_selection() {
        let t = raw(&["x", "y", "z"], &[&["1", "0", "a"], &["2", "1", "b"]]);
        let s = infer_schema(&t, None).unwrap();
        assert_eq!(s[2].role, ColumnRole::Target);
        let s = infer_schema(&t, Some("y")).unwrap();
        assert_eq!(s[1].role, ColumnRole::Target);
        assert_eq!(infer_schema(&t, Some("nope")), Err(Error::TargetAbsent));

        let t = raw(&["target", "b"], &[&["0", "1"], &["1", "2"]]);
        assert_eq!(infer_schema(&t, None).unwrap()[0].role, ColumnRole::Target);
    }

    #[test]
    fn raw_table_rejects_duplicates_and_ragged_rows() {
        let h = vec!["a".to_string(), "a".to_string()];
        assert_eq!(
            RawTable::new(h, vec![]),
            Err(Error::DuplicateColumn("a".into()))
        );
        assert_eq!(RawTable::new(vec![], vec![]), Err(Error::NoHeader));
        let r = RawTable::new(vec!["a".into(), "b".into()], vec![vec!["1".into()]]);
        assert!(matches!(r, Err(Error::RaggedRow { .. })));
    }

    #[test]
    fn schema_validation() {
        let ok = [
            ColumnSchema::feature("a", ColumnKind::Numeric),
            ColumnSchema::target("t", ColumnKind::Binary),
        ];
        assert!(ColumnSchema::validate_all(&ok).is_ok());
        let none = [ColumnSchema::feature("a", ColumnKind::Numeric)];
        assert_eq!(ColumnSchema::validate_all(&none), Err(Error::TargetAbsent));
        let two = [
            ColumnSchema::target("a", ColumnKind::Binary),
            ColumnSchema::target("b", ColumnKind::Binary),
        ];
        assert_eq!(ColumnSchema::validate_all(&two), Err(Error::TargetCount(2)));
    }
}
