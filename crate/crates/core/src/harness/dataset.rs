use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TableCorpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalQuery {
    pub id: String,
    pub question: String,
    pub gold_tables: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_knowledge: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    queries: Vec<EvalQuery>,
}

/// Evaluation queries over one corpus. Every gold table exists in the
/// corpus and every gold set names at least two tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalDataset {
    pub queries: Vec<EvalQuery>,
    /// Queries dropped because their gold set has fewer than two tables.
    pub skipped: Vec<String>,
}

impl EvalDataset {
    pub fn load(path: &Path, corpus: &TableCorpus) -> Result<EvalDataset> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EvalDataset::parse(&text, &path.display().to_string(), corpus)
    }

    pub fn parse(text: &str, file: &str, corpus: &TableCorpus) -> Result<EvalDataset> {
        let parsed: DatasetFile = serde_json::from_str(text).map_err(|e| Error::parse(file, e.line(), e.to_string()))?;
        EvalDataset::from_queries(parsed.queries, corpus)
    }

    pub fn from_queries(queries: Vec<EvalQuery>, corpus: &TableCorpus) -> Result<EvalDataset> {
        let mut problems = Vec::new();
        let mut ids = BTreeSet::new();
        for q in &queries {
            if !ids.insert(q.id.as_str()) {
                problems.push(format!("duplicate query id {:?}", q.id));
            }
            for t in &q.gold_tables {
                if corpus.get(t).is_none() {
                    problems.push(format!("query {:?}: unknown gold table {t:?}", q.id));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let (queries, single): (Vec<_>, Vec<_>) = queries.into_iter().partition(|q| q.gold_tables.len() >= 2);
        let skipped: Vec<String> = single.into_iter().map(|q| q.id).collect();
        if !skipped.is_empty() {
            log::warn!("skipping {} queries with fewer than two gold tables", skipped.len());
        }
        Ok(EvalDataset { queries, skipped })
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            queries: self.queries.clone(),
        };
        serde_json::to_string_pretty(&file).expect("dataset serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ColumnType::Integer, Table};

    fn corpus() -> TableCorpus {
        let tables = ["a", "b", "c"]
            .iter()
            .map(|n| Table::from_rows(*n, &[("x", Integer)], &[vec!["1"]]).unwrap())
            .collect();
        TableCorpus::new(tables).unwrap()
    }

    #[test]
    fn parses_and_skips_single_table_queries() {
        let text = r#"{"queries": [
            {"id": "q1", "question": "x?", "gold_tables": ["a", "b"]},
            {"id": "q2", "question": "y?", "gold_tables": ["c"], "external_knowledge": "k"}
        ]}"#;
        let d = EvalDataset::parse(text, "d.json", &corpus()).unwrap();
        assert_eq!(d.queries.len(), 1);
        assert_eq!(d.skipped, ["q2"]);
    }

    #[test]
    fn unknown_gold_table_is_a_validation_error() {
        let text = r#"{"queries": [{"id": "q1", "question": "x?", "gold_tables": ["a", "zz"]}]}"#;
        assert!(matches!(EvalDataset::parse(text, "d.json", &corpus()), Err(Error::Validation(_))));
    }

    #[test]
    fn round_trips() {
        let text = r#"{"queries": [{"id": "q1", "question": "x?", "gold_tables": ["b", "a"]}]}"#;
        let d = EvalDataset::parse(text, "d.json", &corpus()).unwrap();
        assert_eq!(EvalDataset::parse(&d.to_json(), "again", &corpus()).unwrap(), d);
    }
}
