use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Column, ColumnType, Table, TableCorpus};
use crate::error::{Error, Result};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON document holding a list of tables.
    Json,
    /// One CSV file per table; the file stem is the table name.
    CsvDirectory,
}

impl CorpusFormat {
    /// Guess the format from the path: directories are CSV directories.
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            CorpusFormat::CsvDirectory
        } else {
            CorpusFormat::Json
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corpus-json" | "json" => Ok(CorpusFormat::Json),
            "csv-directory" | "csv" => Ok(CorpusFormat::CsvDirectory),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<TableCorpus> {
    match format {
        CorpusFormat::Json => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_corpus_json(&text, &path.display().to_string())
        }
        CorpusFormat::CsvDirectory => load_csv_directory(path),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    name: String,
    columns: Vec<JsonColumn>,
    #[serde(default)]
    rows: Vec<Vec<serde_json::Value>>,
}

#[derive(Serialize, Deserialize)]
struct JsonColumn {
    header: String,
    #[serde(rename = "type", default)]
    ty: Option<String>,
}

/// Parse a corpus-json document. `file` only labels errors.
pub fn parse_corpus_json(text: &str, file: &str) -> Result<TableCorpus> {
    let raw: Vec<JsonTable> =
        serde_json::from_str(text).map_err(|e| Error::parse(file, e.line(), e))?;
    let mut tables = Vec::with_capacity(raw.len());
    for table in raw {
        let width = table.columns.len();
        let mut values: Vec<Vec<String>> = vec![Vec::with_capacity(table.rows.len()); width];
        for (row_index, row) in table.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::parse(
                    file,
                    0,
                    format!(
                        "table {:?} row {row_index} has {} cells, expected {width}",
                        table.name,
                        row.len()
                    ),
                ));
            }
            for (column, cell) in values.iter_mut().zip(row) {
                column.push(json_cell(cell));
            }
        }
        let mut columns = Vec::with_capacity(width);
        for (spec, cells) in table.columns.into_iter().zip(values) {
            let declared_type = match spec.ty.as_deref() {
                Some(label) => ColumnType::parse(label).ok_or_else(|| {
                    Error::parse(
                        file,
                        0,
                        format!(
                            "table {:?} column {:?} has unknown type {label:?}",
                            table.name, spec.header
                        ),
                    )
                })?,
                None => infer_column_type(cells.iter().map(String::as_str)),
            };
            columns.push(Column::new(spec.header, declared_type, cells));
        }
        tables.push(Table::new(table.name, columns)?);
    }
    TableCorpus::new(tables)
}

/// Corpus-json text for `corpus`; cells are written as strings and types
/// are declared, so parsing the output gives back an equal corpus.
pub fn corpus_to_json(corpus: &TableCorpus) -> String {
    let tables: Vec<JsonTable> = corpus
        .tables()
        .iter()
        .map(|t| JsonTable {
            name: t.name().to_string(),
            columns: t
                .columns()
                .iter()
                .map(|c| JsonColumn {
                    header: c.header.clone(),
                    ty: Some(c.declared_type.as_str().to_string()),
                })
                .collect(),
            rows: (0..t.row_count())
                .map(|r| {
                    t.columns()
                        .iter()
                        .map(|c| serde_json::Value::String(c.values[r].clone()))
                        .collect()
                })
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&tables).expect("corpus serializes")
}

fn json_cell(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn load_csv_directory(dir: &Path) -> Result<TableCorpus> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();

    let mut tables = Vec::with_capacity(files.len());
    for file in files {
        let name = file
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Corpus(format!("non-utf8 file name {}", file.display())))?
            .to_string();
        tables.push(read_csv_table(&file, name)?);
    }
    TableCorpus::new(tables)
}

fn read_csv_table(file: &Path, name: String) -> Result<Table> {
    let label = file.display().to_string();
    let csv_error = |e: csv::Error| {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::parse(&label, line, e)
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(file)
        .map_err(csv_error)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut values: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        for (column, cell) in values.iter_mut().zip(record.iter()) {
            column.push(cell.to_string());
        }
    }
    let columns = headers
        .into_iter()
        .zip(values)
        .map(|(header, cells)| {
            let ty = infer_column_type(cells.iter().map(String::as_str));
            Column::new(header, ty, cells)
        })
        .collect();
    Table::new(name, columns)
}

const TYPE_INFERENCE_SHARE: f64 = 0.95;

/// A column is integer, real or date when at least 95% of its non-null cells
/// parse as such; otherwise text. Columns with no non-null cell are unknown.
pub fn infer_column_type<'a>(cells: impl Iterator<Item = &'a str>) -> ColumnType {
    let (mut total, mut ints, mut reals, mut dates) = (0usize, 0usize, 0usize, 0usize);
    for cell in cells {
        let cell = cell.trim();
        if cell.is_empty() {
            continue;
        }
        total += 1;
        if cell.parse::<i64>().is_ok() {
            ints += 1;
        }
        if cell.parse::<f64>().is_ok_and(f64::is_finite) {
            reals += 1;
        }
        if looks_like_date(cell) {
            dates += 1;
        }
    }
    if total == 0 {
        return ColumnType::Unknown;
    }
    let share = |n: usize| n as f64 / total as f64 >= TYPE_INFERENCE_SHARE;
    if share(ints) {
        ColumnType::Integer
    } else if share(reals) {
        ColumnType::Real
    } else if share(dates) {
        ColumnType::Date
    } else {
        ColumnType::Text
    }
}

/// `YYYY-MM-DD` or `YYYY/MM/DD`, optionally followed by a time part.
pub(crate) fn looks_like_date(cell: &str) -> bool {
    let date = cell.split([' ', 'T']).next().unwrap_or("");
    let parts: Vec<&str> = date.split(['-', '/']).collect();
    if parts.len() != 3 || parts[0].len() != 4 {
        return false;
    }
    let numbers: Option<Vec<u32>> = parts.iter().map(|p| p.parse().ok()).collect();
    match numbers.as_deref() {
        Some([_, month, day]) => (1..=12).contains(month) && (1..=31).contains(day),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_types() {
        assert_eq!(infer_column_type(["1", "2", ""].into_iter()), ColumnType::Integer);
        assert_eq!(infer_column_type(["1.5", "2"].into_iter()), ColumnType::Real);
        assert_eq!(infer_column_type(["2020-01-01", "1999/12/31"].into_iter()), ColumnType::Date);
        assert_eq!(infer_column_type(["a", "1"].into_iter()), ColumnType::Text);
        assert_eq!(infer_column_type(["", " "].into_iter()), ColumnType::Unknown);
        // 19 of 20 integers is exactly the 95% threshold
        let mut cells = vec!["7"; 19];
        cells.push("x");
        assert_eq!(infer_column_type(cells.into_iter()), ColumnType::Integer);
    }

    #[test]
    fn json_missing_cell_names_table_and_row() {
        let doc = r#"[{"name": "loan", "columns": [{"header": "a", "type": "integer"},
            {"header": "b", "type": "text"}], "rows": [[1, "x"], [2]]}]"#;
        let err = parse_corpus_json(doc, "c.json").unwrap_err().to_string();
        assert!(err.contains("\"loan\""), "{err}");
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn json_writer_round_trips() {
        let doc = r#"[{"name": "t", "columns": [{"header": "a", "type": "integer"}, {"header": "b", "type": "date"}],
            "rows": [[1, null], [2, "2020-01-02"]]}, {"name": "u", "columns": [{"header": "c"}]}]"#;
        let corpus = parse_corpus_json(doc, "c.json").unwrap();
        assert_eq!(parse_corpus_json(&corpus_to_json(&corpus), "again").unwrap(), corpus);
    }

    #[test]
    fn json_syntax_error_reports_line() {
        let err = parse_corpus_json("[\n{\"name\": }", "c.json").unwrap_err();
        match err {
            Error::Parse { file, line, .. } => {
                assert_eq!(file, "c.json");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_cells_of_any_scalar_type() {
        let doc = r#"[{"name": "t", "columns": [{"header": "a"}, {"header": "b"}],
            "rows": [[1, null], [2.5, true]]}]"#;
        let corpus = parse_corpus_json(doc, "c.json").unwrap();
        let t = corpus.get("t").unwrap();
        assert_eq!(t.columns()[0].values, ["1", "2.5"]);
        assert_eq!(t.columns()[0].declared_type, ColumnType::Real);
        assert_eq!(t.columns()[1].values, ["", "true"]);
    }
}
