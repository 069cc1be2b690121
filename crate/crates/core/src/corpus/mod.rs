//! Table corpora: ingestion, column profiling and text rendering.
//!
//! A [`TableCorpus`] is immutable once loaded. Tables are kept in
//! lexicographic name order so every downstream iteration is deterministic.

mod gold;
mod load;
mod profile;
mod render;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use gold::{load_gold_constraints, parse_gold_constraints, ColumnRef, GoldConstraintSet};
pub use load::{corpus_to_json, infer_column_type, load_corpus, parse_corpus_json, CorpusFormat};
pub use profile::{normalize_cell, profile_column, profile_table, ColumnProfile, ProfileStore};
pub use render::{render_column_text, render_table_text, ColumnText, DEFAULT_ROW_LIMIT};

/// Declared or inferred type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Real,
    Text,
    Date,
    Unknown,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Real => "real",
            ColumnType::Text => "text",
            ColumnType::Date => "date",
            ColumnType::Unknown => "unknown",
        }
    }

    /// Parse a type label as found in corpus files. Accepts a few SQL spellings.
    pub fn parse(label: &str) -> Option<Self> {
        let t = match label.trim().to_ascii_lowercase().as_str() {
            "integer" | "int" | "bigint" | "smallint" => ColumnType::Integer,
            "real" | "float" | "double" | "numeric" | "number" | "decimal" => ColumnType::Real,
            "text" | "string" | "varchar" | "char" => ColumnType::Text,
            "date" | "datetime" | "timestamp" | "time" => ColumnType::Date,
            "unknown" | "" => ColumnType::Unknown,
            _ => return None,
        };
        Some(t)
    }

    fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Integer | ColumnType::Real)
    }

    /// Whether instance overlap between two columns of these types is meaningful.
    /// Dates never match numbers; everything else may after normalization.
    pub fn instance_compatible(self, other: ColumnType) -> bool {
        !((self == ColumnType::Date && other.is_numeric())
            || (other == ColumnType::Date && self.is_numeric()))
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A cell read under its column's type.
#[derive(Debug, Clone, PartialEq)]
pub enum TypedValue {
    Null,
    Integer(i64),
    Real(f64),
    Date(String),
    Text(String),
}

impl TypedValue {
    pub fn interpret(cell: &str, ty: ColumnType) -> TypedValue {
        let trimmed = cell.trim();
        if trimmed.is_empty() {
            return TypedValue::Null;
        }
        match ty {
            ColumnType::Integer => trimmed
                .parse()
                .map(TypedValue::Integer)
                .unwrap_or_else(|_| TypedValue::Text(trimmed.to_string())),
            ColumnType::Real => trimmed
                .parse()
                .map(TypedValue::Real)
                .unwrap_or_else(|_| TypedValue::Text(trimmed.to_string())),
            ColumnType::Date if load::looks_like_date(trimmed) => {
                TypedValue::Date(trimmed.to_string())
            }
            _ => TypedValue::Text(trimmed.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub header: String,
    pub declared_type: ColumnType,
    /// Cell strings, parallel to the owning table's rows.
    pub values: Vec<String>,
}

impl Column {
    pub fn new(header: impl Into<String>, declared_type: ColumnType, values: Vec<String>) -> Self {
        Column {
            header: header.into(),
            declared_type,
            values,
        }
    }

    pub fn typed_value(&self, row: usize) -> Option<TypedValue> {
        self.values
            .get(row)
            .map(|cell| TypedValue::interpret(cell, self.declared_type))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    /// Build a table from column-major data, checking the table invariants.
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::Corpus("table with an empty name".into()));
        }
        if columns.is_empty() {
            return Err(Error::Corpus(format!("table {name:?} has no columns")));
        }
        let row_count = columns[0].values.len();
        let mut seen = std::collections::HashSet::new();
        for column in &columns {
            if column.header.is_empty() {
                return Err(Error::Corpus(format!("table {name:?} has an empty column header")));
            }
            if !seen.insert(column.header.as_str()) {
                return Err(Error::Corpus(format!(
                    "table {name:?} has duplicate column header {:?}",
                    column.header
                )));
            }
            if column.values.len() != row_count {
                return Err(Error::Corpus(format!(
                    "table {name:?} column {:?} has {} values, expected {row_count}",
                    column.header,
                    column.values.len()
                )));
            }
        }
        Ok(Table {
            name,
            columns,
            row_count,
        })
    }

    /// Build a table from row-major data. Every row must have one cell per header.
    pub fn from_rows(
        name: impl Into<String>,
        headers: &[(&str, ColumnType)],
        rows: &[Vec<&str>],
    ) -> Result<Self> {
        let name = name.into();
        let mut columns: Vec<Column> = headers
            .iter()
            .map(|(h, t)| Column::new(*h, *t, Vec::with_capacity(rows.len())))
            .collect();
        for (index, row) in rows.iter().enumerate() {
            if row.len() != headers.len() {
                return Err(Error::Corpus(format!(
                    "table {name:?} row {index} has {} cells, expected {}",
                    row.len(),
                    headers.len()
                )));
            }
            for (column, cell) in columns.iter_mut().zip(row) {
                column.values.push(cell.to_string());
            }
        }
        Table::new(name, columns)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> Option<&Column> {
        self.columns.get(index)
    }

    pub fn column_index(&self, header: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.header == header)
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn row(&self, index: usize) -> Option<Vec<&str>> {
        (index < self.row_count).then(|| {
            self.columns
                .iter()
                .map(|c| c.values[index].as_str())
                .collect()
        })
    }
}

/// The retrieval universe: uniquely named tables in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableCorpus {
    tables: Vec<Table>,
    index: HashMap<String, usize>,
}

impl TableCorpus {
    pub fn new(mut tables: Vec<Table>) -> Result<Self> {
        tables.sort_by(|a, b| a.name.cmp(&b.name));
        let mut index = HashMap::with_capacity(tables.len());
        for (i, table) in tables.iter().enumerate() {
            if index.insert(table.name.clone(), i).is_some() {
                return Err(Error::Corpus(format!("duplicate table name {:?}", table.name)));
            }
        }
        Ok(TableCorpus { tables, index })
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Table> {
        self.index.get(name).map(|&i| &self.tables[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// SHA-256 over a canonical serialization of every table. Used to
    /// invalidate caches derived from corpus contents.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for table in &self.tables {
            hash_field(&mut hasher, table.name.as_bytes());
            hasher.update((table.columns.len() as u64).to_le_bytes());
            for column in &table.columns {
                hash_field(&mut hasher, column.header.as_bytes());
                hash_field(&mut hasher, column.declared_type.as_str().as_bytes());
                hasher.update((column.values.len() as u64).to_le_bytes());
                for v in &column.values {
                    hash_field(&mut hasher, v.as_bytes());
                }
            }
        }
        hex_digest(hasher)
    }
}

fn hash_field(hasher: &mut Sha256, bytes: &[u8]) {
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
