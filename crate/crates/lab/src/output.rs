//! CSV files with a `#` header carrying the run's configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;
use crate::error::{io_err, LabResult};

/// Prefix of the only header line that varies between identical runs.
pub const TIMESTAMP_PREFIX: &str = "# timestamp = ";

pub fn header(config: &ExperimentConfig, title: &str) -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut h = format!("# haarmul {title}\n{TIMESTAMP_PREFIX}{secs}\n");
    for (k, v) in config.to_pairs() {
        h.push_str(&format!("# {k} = {v}\n"));
    }
    h
}

/// Lines that are not `#` comments.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

/// Everything except the timestamp line.
pub fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with(TIMESTAMP_PREFIX)).map(|l| format!("{l}\n")).collect()
}

pub fn ensure_dir(dir: &Path) -> LabResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_file(path: &Path, contents: &str) -> LabResult<PathBuf> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, contents).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

pub fn write_csv(config: &ExperimentConfig, name: &str, title: &str, columns: &str, rows: &str) -> LabResult<PathBuf> {
    let text = format!("{}{columns}\n{rows}", header(config, title));
    write_file(&config.out.join(name), &text)
}

/// `{:e}` keeps full precision and is stable across runs.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "nan".into())
}
