use serde::{Deserialize, Serialize};

use super::Table;

/// Instance values included per column when flattening a table.
pub const DEFAULT_ROW_LIMIT: usize = 3;

/// Flatten a table for coarse relevance encoding:
/// `"Name. col (type): v1, v2. col2 (type): v1."`
///
/// At most `row_limit` non-null values are listed per column.
pub fn render_table_text(table: &Table, row_limit: usize) -> String {
    let mut out = String::new();
    out.push_str(table.name());
    out.push('.');
    for column in table.columns() {
        out.push(' ');
        out.push_str(&column.header);
        out.push_str(" (");
        out.push_str(column.declared_type.as_str());
        out.push(')');
        let values: Vec<&str> = column
            .values
            .iter()
            .map(|v| v.trim())
            .filter(|v| !v.is_empty())
            .take(row_limit)
            .collect();
        if !values.is_empty() {
            out.push_str(": ");
            out.push_str(&values.join(", "));
        }
        out.push('.');
    }
    out
}

/// The three schema segments describing a column in context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnText {
    pub header: String,
    pub table: String,
    /// Comma-joined headers of the other columns, in table order.
    pub others: String,
}

impl ColumnText {
    pub fn segments(&self) -> [&str; 3] {
        [&self.header, &self.table, &self.others]
    }

    /// Concatenated form used for sub-query matching.
    pub fn rendered(&self) -> String {
        format!("{} | {} | {}", self.header, self.table, self.others)
    }
}

/// Panics if `column_index` is out of range.
pub fn render_column_text(table: &Table, column_index: usize) -> ColumnText {
    let columns = table.columns();
    let others = columns
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != column_index)
        .map(|(_, c)| c.header.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    ColumnText {
        header: columns[column_index].header.clone(),
        table: table.name().to_string(),
        others,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ColumnType::{Integer, Text};

    fn loan() -> Table {
        Table::from_rows(
            "Loan",
            &[("loan_id", Integer), ("amount", Integer)],
            &[vec!["1", "500"], vec!["2", "700"]],
        )
        .unwrap()
    }

    #[test]
    fn flattening_format() {
        assert_eq!(
            render_table_text(&loan(), 1),
            "Loan. loan_id (integer): 1. amount (integer): 500."
        );
        assert_eq!(
            render_table_text(&loan(), 0),
            "Loan. loan_id (integer). amount (integer)."
        );
        assert_eq!(render_table_text(&loan(), 3), render_table_text(&loan(), 3));
    }

    #[test]
    fn column_segments() {
        let disp = Table::from_rows(
            "Disp",
            &[("disp_id", Integer), ("client_id", Integer), ("card_id", Integer)],
            &[],
        )
        .unwrap();
        let text = render_column_text(&disp, 2);
        assert_eq!(text.segments(), ["card_id", "Disp", "disp_id, client_id"]);

        let single = Table::from_rows("One", &[("x", Text)], &[]).unwrap();
        assert_eq!(render_column_text(&single, 0).others, "");
    }
}
