//! Comparison tables as CSV.

use std::path::Path;

use super::format::scientific;
use super::write_atomic;
use crate::error::Result;
use crate::problems::ComparisonRow;

/// Header line plus one `%.6e`-formatted line per row.
pub fn format_table(rows: &[ComparisonRow]) -> String {
    let mut out = ComparisonRow::HEADER.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.values().iter().map(|&v| scientific(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    write_atomic(path, &format_table(rows))
}
