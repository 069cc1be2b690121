use std::fmt::Write as _;

use crate::corpus::{ColumnType, Table, TableCorpus};
use crate::mip::JoinPlan;

pub const SQL_INSTRUCTION: &str = "Generate SQL given the question, tables, and external knowledge to answer \
the question correctly. First, identify tables with relevant columns. Then, join these tables using only columns \
in the tables. Finally, decide which columns to return in the SQL to answer the original question. When returning \
columns, please specify the tables associated with it to prevent ambiguity. Think step by step.";

const EXAMPLE_COLUMNS: [(&str, &str); 12] = [
    ("singer_id", "TEXT"),
    ("nation", "TEXT"),
    ("sname", "TEXT"),
    ("dname", "TEXT"),
    ("cname", "TEXT"),
    ("age", "INTEGER"),
    ("year", "INTEGER"),
    ("birth_year", "INTEGER"),
    ("salary", "REAL"),
    ("city", "TEXT"),
    ("phone_number", "INTEGER"),
    ("tax", "REAL"),
];

const EXAMPLE_TAIL: &str = "External Knowledge: age = year - birth_year\n\
Question: How many singers in USA who is older than 27?\n\
Answer: SELECT COUNT(*) FROM singer WHERE year - birth_year > 27;\n";

const INDENT: &str = "    ";

fn sql_type(ty: ColumnType) -> &'static str {
    match ty {
        ColumnType::Integer => "INTEGER",
        ColumnType::Real => "REAL",
        ColumnType::Text => "TEXT",
        ColumnType::Date => "DATE",
        ColumnType::Unknown => "TEXT",
    }
}

fn create_table(out: &mut String, name: &str, lines: &[String]) {
    let _ = writeln!(out, "CREATE TABLE {name}(");
    for (n, line) in lines.iter().enumerate() {
        let end = if n + 1 == lines.len() { ")" } else { "," };
        let _ = writeln!(out, "{INDENT}{line}{end}");
    }
    if lines.is_empty() {
        out.push_str(")\n");
    }
}

/// `<column> <TYPE>: <v1>, <v2>, ...` with up to `row_limit` non-empty sample
/// values.
fn column_lines(table: &Table, row_limit: usize) -> Vec<String> {
    table
        .columns()
        .iter()
        .map(|c| {
            let mut line = format!("{} {}:", c.header, sql_type(c.declared_type));
            for v in c.values.iter().map(|v| v.trim()).filter(|v| !v.is_empty()).take(row_limit) {
                let _ = write!(line, " {v},");
            }
            line.push_str(" ...");
            line
        })
        .collect()
}

/// The text-to-SQL prompt for a plan: instruction, one worked example, one
/// CREATE TABLE block per plan table in plan order, then the question.
/// Plan tables missing from the corpus are skipped.
pub fn emit_sql_prompt(
    corpus: &TableCorpus,
    plan: &JoinPlan,
    question: &str,
    external_knowledge: Option<&str>,
    row_limit: usize,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// TASK INSTRUCTION\n{SQL_INSTRUCTION}\n");
    out.push_str("// 1-SHOT PSEUDO EXAMPLE\n");
    let example: Vec<String> = EXAMPLE_COLUMNS
        .iter()
        .map(|(c, t)| format!("{c} {t}: <instance 1>, ..."))
        .collect();
    create_table(&mut out, "singer", &example);
    let _ = writeln!(out, "\n{EXAMPLE_TAIL}");
    out.push_str("// NEW INPUT\n");
    for name in &plan.tables {
        match corpus.get(name) {
            Some(table) => create_table(&mut out, name, &column_lines(table, row_limit)),
            None => log::warn!("plan table {name:?} is not in the corpus"),
        }
    }
    let _ = write!(
        out,
        "\n\nExternal knowledge: {}\nQuestion: {}\nAnswer:",
        external_knowledge.unwrap_or(""),
        question
    );
    out
}
