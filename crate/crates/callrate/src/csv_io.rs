//! Reading monthly rate series from `date,value` CSV files.

use std::io::Read;
use std::path::{Path, PathBuf};

use callrate_core::series::{RateSeries, Units, YearMonth};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error(transparent)]
    Series(#[from] callrate_core::Error),
}

/// Loads `path`, labelling the series with the file stem.
pub fn load_csv(path: &Path, units: Units) -> Result<RateSeries, LoadError> {
    let file = std::fs::File::open(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, label, units)
}

/// Two columns, `YYYY-MM` then a value in percent. A header row is
/// optional, blank lines and lines starting with `#` are skipped. Rows may
/// come in any order; they are sorted before validation.
pub fn parse_csv(reader: impl Read, label: impl Into<String>, units: Units) -> Result<RateSeries, LoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut obs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| LoadError::Row {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(LoadError::Row {
                row,
                message: format!("expected 2 fields (date,value), found {}", record.len()),
            });
        }
        let (date, value) = (&record[0], &record[1]);
        let month = date.parse::<YearMonth>();
        let number = value.parse::<f64>();
        if i == 0 && month.is_err() && number.is_err() {
            continue; // header
        }
        let month = month.map_err(|_| LoadError::Row {
            row,
            message: format!("date {date:?} is not in YYYY-MM form"),
        })?;
        let number = number.map_err(|_| LoadError::Row {
            row,
            message: format!("value {value:?} is not a number"),
        })?;
        if !number.is_finite() {
            return Err(LoadError::Row {
                row,
                message: format!("value {value:?} is not finite"),
            });
        }
        obs.push((month, number));
    }
    Ok(RateSeries::new(label, units, obs)?)
}
