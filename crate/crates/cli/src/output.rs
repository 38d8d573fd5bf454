use std::io::Write;
use std::path::Path;

use crate::error::CliResult;
use crate::format::{csv_header, csv_row, json_line, Record};

fn is_csv(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension())
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes `text` to `path`, or to standard output.
pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// JSON lines, or CSV with a header row when the path ends in `.csv`.
pub fn write_records(path: Option<&Path>, records: &[Record]) -> CliResult<()> {
    let mut text = String::new();
    if is_csv(path) {
        if let Some(first) = records.first() {
            text.push_str(&csv_header(first));
            text.push('\n');
        }
        for r in records {
            text.push_str(&csv_row(r));
            text.push('\n');
        }
    } else {
        for r in records {
            text.push_str(&json_line(r));
            text.push('\n');
        }
    }
    write_text(path, &text)
}
