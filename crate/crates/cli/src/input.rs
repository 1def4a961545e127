//! Series ingestion: embedded datasets and `label,value` CSV files.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use greyfc_core::datasets::{self, Dataset};
use greyfc_core::series::MIN_LEN;
use greyfc_core::TimeSeries;

use crate::failure::Failure;

/// A series plus the defaults that come with it.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub series: TimeSeries,
    pub train_len: usize,
    pub correct_initial: bool,
}

impl From<Dataset> for Source {
    fn from(d: Dataset) -> Self {
        Self {
            name: d.name.to_string(),
            series: d.series,
            train_len: d.train_len,
            correct_initial: d.correct_initial,
        }
    }
}

pub fn dataset(name: &str) -> Result<Source, Failure> {
    datasets::by_name(name).map(Source::from).ok_or_else(|| {
        Failure::config(format!(
            "unknown dataset '{name}' (available: {})",
            datasets::NAMES.join(", ")
        ))
    })
}

pub fn file(path: &Path) -> Result<Source, Failure> {
    let series = load_csv(path)?;
    Ok(Source {
        name: path.display().to_string(),
        train_len: series.len(),
        correct_initial: true,
        series,
    })
}

/// Read a `label,value` CSV file. A header row is detected by a non-numeric
/// value field; further columns are ignored, as are trailing rows with an
/// empty value (the forecast rows of a CSV report).
pub fn load_csv(path: &Path) -> Result<TimeSeries, Failure> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(text.trim_start_matches('\u{feff}'))
}

pub fn parse_csv(text: &str) -> Result<TimeSeries, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut gap = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Failure::data(format!("row {row}: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 2 {
            return Err(Failure::data(format!(
                "row {row}: expected two columns (label,value), found {}",
                record.len()
            )));
        }
        let (label, raw) = (&record[0], &record[1]);
        if raw.is_empty() {
            gap.get_or_insert(row);
            continue;
        }
        if let Some(gap) = gap {
            return Err(Failure::data(format!("row {gap}: missing value")));
        }
        let value: f64 = match raw.parse() {
            Ok(v) => v,
            Err(_) if row == 1 => continue,
            Err(_) => {
                return Err(Failure::data(format!(
                    "row {row}: value '{raw}' is not a number"
                )))
            }
        };
        if !value.is_finite() {
            return Err(Failure::data(format!(
                "row {row}: value '{raw}' is not finite"
            )));
        }
        if value <= 0.0 {
            return Err(Failure::data(format!(
                "row {row}: value {raw} is not strictly positive"
            )));
        }
        labels.push(label.to_string());
        values.push(value);
    }
    if values.len() < MIN_LEN {
        return Err(Failure::data(format!(
            "series has {} rows, at least {MIN_LEN} are required",
            values.len()
        )));
    }
    Ok(TimeSeries::new(labels, values)?)
}

/// Read `label,actual,fitted` rows (e.g. a CSV report). Rows without an
/// actual value, such as forecast rows, are skipped.
pub fn load_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    parse_pairs(text.trim_start_matches('\u{feff}'))
}

pub fn parse_pairs(text: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut actual, mut fitted) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Failure::data(format!("row {row}: {e}")))?;
        if record.iter().all(str::is_empty) || record.get(1).is_some_and(str::is_empty) {
            continue;
        }
        if record.len() < 3 {
            return Err(Failure::data(format!(
                "row {row}: expected columns label,actual,fitted"
            )));
        }
        match (record[1].parse::<f64>(), record[2].parse::<f64>()) {
            (Ok(a), Ok(f)) => {
                actual.push(a);
                fitted.push(f);
            }
            _ if row == 1 => continue,
            _ => {
                return Err(Failure::data(format!(
                    "row {row}: '{}' / '{}' are not numbers",
                    &record[1], &record[2]
                )))
            }
        }
    }
    if actual.is_empty() {
        return Err(Failure::data("no rows with both actual and fitted values"));
    }
    Ok((actual, fitted))
}
