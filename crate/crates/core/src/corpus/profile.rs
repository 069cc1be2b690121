use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{render_column_text, ColumnText, ColumnType, Table, TableCorpus};

/// Per-column statistics used by join inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    /// Normalized non-null cell values.
    pub distinct_values: BTreeSet<String>,
    /// `|distinct_values| / row_count`, or 0 for an empty table.
    pub uniqueness: f64,
    pub row_count: usize,
    pub declared_type: ColumnType,
    pub text: ColumnText,
}

/// Trim, case-fold and collapse internal whitespace.
pub fn normalize_cell(cell: &str) -> String {
    cell.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Profile one column. Panics if `column_index` is out of range.
pub fn profile_column(table: &Table, column_index: usize) -> ColumnProfile {
    let column = &table.columns()[column_index];
    let distinct_values: BTreeSet<String> = column
        .values
        .iter()
        .map(|v| normalize_cell(v))
        .filter(|v| !v.is_empty())
        .collect();
    let row_count = table.row_count();
    // nulls count towards the denominator
    let uniqueness = if row_count == 0 {
        0.0
    } else {
        distinct_values.len() as f64 / row_count as f64
    };
    ColumnProfile {
        distinct_values,
        uniqueness,
        row_count,
        declared_type: column.declared_type,
        text: render_column_text(table, column_index),
    }
}

pub fn profile_table(table: &Table) -> Vec<ColumnProfile> {
    (0..table.columns().len())
        .map(|k| profile_column(table, k))
        .collect()
}

/// Profiles for every column of a corpus, indexed like the corpus tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStore {
    pub corpus_hash: String,
    tables: Vec<Vec<ColumnProfile>>,
}

impl ProfileStore {
    pub fn build(corpus: &TableCorpus) -> Self {
        let tables = corpus.tables().par_iter().map(profile_table).collect();
        ProfileStore {
            corpus_hash: corpus.content_hash(),
            tables,
        }
    }

    pub fn table(&self, index: usize) -> &[ColumnProfile] {
        &self.tables[index]
    }

    pub fn tables(&self) -> &[Vec<ColumnProfile>] {
        &self.tables
    }
}
