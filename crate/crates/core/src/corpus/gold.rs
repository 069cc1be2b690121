use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TableCorpus;
use crate::error::{Error, Result};

/// A column addressed by table name and header.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef {
            table: table.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

/// Known key/foreign-key column pairs, stored unordered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldConstraintSet {
    pairs: BTreeSet<(ColumnRef, ColumnRef)>,
}

impl GoldConstraintSet {
    pub fn insert(&mut self, a: ColumnRef, b: ColumnRef) {
        self.pairs.insert(order(a, b));
    }

    pub fn contains(&self, a: &ColumnRef, b: &ColumnRef) -> bool {
        let key = order(a.clone(), b.clone());
        self.pairs.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ColumnRef, ColumnRef)> {
        self.pairs.iter()
    }
}

fn order(a: ColumnRef, b: ColumnRef) -> (ColumnRef, ColumnRef) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn load_gold_constraints(path: &Path, corpus: &TableCorpus) -> Result<GoldConstraintSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gold_constraints(&text, &path.display().to_string(), corpus)
}

/// Parse `table.column<TAB>table.column` lines. Blank lines and `#` comments
/// are skipped. Every reference must resolve in `corpus`; all offending
/// pairs are reported together.
pub fn parse_gold_constraints(
    text: &str,
    file: &str,
    corpus: &TableCorpus,
) -> Result<GoldConstraintSet> {
    let mut set = GoldConstraintSet::default();
    let mut offending = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(file, index + 1, "expected two tab-separated column references"));
        };
        match (resolve(a.trim(), corpus), resolve(b.trim(), corpus)) {
            (Some(a), Some(b)) => set.insert(a, b),
            _ => offending.push(format!("line {}: {} <-> {}", index + 1, a.trim(), b.trim())),
        }
    }
    if offending.is_empty() {
        Ok(set)
    } else {
        Err(Error::Validation(offending))
    }
}

/// Split `table.column` at whichever dot yields an existing table and column,
/// so table names or headers containing dots still resolve.
fn resolve(reference: &str, corpus: &TableCorpus) -> Option<ColumnRef> {
    reference.match_indices('.').find_map(|(at, _)| {
        let (table, column) = (&reference[..at], &reference[at + 1..]);
        let t = corpus.get(table)?;
        t.column_index(column)?;
        Some(ColumnRef::new(table, column))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ColumnType::Integer, Table};

    fn corpus() -> TableCorpus {
        TableCorpus::new(vec![
            Table::from_rows("Disp", &[("disp_id", Integer), ("client_id", Integer)], &[]).unwrap(),
            Table::from_rows("Client", &[("id", Integer)], &[]).unwrap(),
            Table::from_rows("v1.2", &[("a.b", Integer)], &[]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn one_pair_unordered() {
        let set = parse_gold_constraints("Disp.client_id\tClient.id\n", "g", &corpus()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.contains(
            &ColumnRef::new("Client", "id"),
            &ColumnRef::new("Disp", "client_id")
        ));
    }

    #[test]
    fn unknown_table_is_a_validation_error() {
        let err = parse_gold_constraints("Disp.client_id\tNope.id\nX.y\tClient.id\n", "g", &corpus())
            .unwrap_err();
        match err {
            Error::Validation(list) => assert_eq!(list.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_set() {
        assert!(parse_gold_constraints("", "g", &corpus()).unwrap().is_empty());
    }

    #[test]
    fn dotted_names_resolve() {
        let set = parse_gold_constraints("v1.2.a.b\tClient.id", "g", &corpus()).unwrap();
        assert!(set.contains(&ColumnRef::new("v1.2", "a.b"), &ColumnRef::new("Client", "id")));
    }
}
