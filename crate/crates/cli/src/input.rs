use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rhoci::DataSet;

/// Reads a two-column numeric CSV. A first row that does not parse as
/// numbers is taken to be a header.
pub fn read_pairs(path: &Path) -> Result<DataSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.with_context(|| format!("{}: line {line}", path.display()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 2 {
            bail!("{}: line {line}: expected 2 columns, found {}", path.display(), record.len());
        }
        let parsed: Option<(f64, f64)> = match (record[0].parse(), record[1].parse()) {
            (Ok(a), Ok(b)) => Some((a, b)),
            _ => None,
        };
        match parsed {
            Some(row) => rows.push(row),
            None if line == 1 => continue,
            None => bail!("{}: line {line}: non-numeric value", path.display()),
        }
    }
    DataSet::new(rows).map_err(|e| anyhow!("{}: {e}", path.display()))
}
