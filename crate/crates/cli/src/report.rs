//! CSV report files: a fixed header line, then one record per line.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn write_records<T: Serialize>(
    path: &Path,
    header: &[&str],
    records: &[T],
) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Report(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for r in records {
        w.serialize(r).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}
