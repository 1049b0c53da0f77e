//! File helpers shared by the examples and the command-line tool.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

/// Full-precision decimal (17 significant digits).
pub fn csv_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV with header `a,b` and one row per pair.
pub fn series_csv(header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        out.push_str(&csv_f64(a));
        out.push(',');
        out.push_str(&csv_f64(b));
        out.push('\n');
    }
    out
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)? + "\n")?;
    Ok(())
}
