//! CSV emission and the run manifest. Files are UTF-8 with `#`-prefixed
//! metadata lines, a column-name row, then data at full double precision;
//! byte-identical across runs for identical inputs (no timestamps).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{CliError, CliResult};

/// Record of one emitted file, for the manifest.
#[derive(Debug, Clone)]
pub struct EmittedFile {
    pub name: String,
    pub bytes: usize,
    pub fnv1a64: u64,
}

pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Write a rectangular series as CSV. `metadata` becomes `# key = value`
/// header lines; every row must match the column count.
pub fn write_series(
    dir: &Path,
    name: &str,
    metadata: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> CliResult<EmittedFile> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(CliError::Config(format!(
                "row {i} of {name} has {} values for {} columns",
                row.len(),
                columns.len()
            )));
        }
    }
    let mut out = String::new();
    for (k, v) in metadata {
        writeln!(out, "# {k} = {v}").expect("string write");
    }
    writeln!(out, "{}", columns.join(",")).expect("string write");
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("string write");
            first = false;
        }
        out.push('\n');
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, out.as_bytes())?;
    Ok(EmittedFile {
        name: name.to_string(),
        bytes: out.len(),
        fnv1a64: fnv1a64(out.as_bytes()),
    })
}

/// Parsed CSV series: metadata, column names, data rows.
#[derive(Debug)]
pub struct Series {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Round-trip reader for files produced by [`write_series`].
pub fn read_series(path: &Path) -> CliResult<Series> {
    let text = fs::read_to_string(path)?;
    let mut metadata = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let row: Result<Vec<f64>, _> =
                    line.split(',').map(|v| v.trim().parse::<f64>()).collect();
                let row = row.map_err(|e| {
                    CliError::Io(format!("{}: line {}: {e}", path.display(), lineno + 1))
                })?;
                if row.len() != cols.len() {
                    return Err(CliError::Io(format!(
                        "{}: line {} has {} values for {} columns",
                        path.display(),
                        lineno + 1,
                        row.len(),
                        cols.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    Ok(Series {
        metadata,
        columns: columns.unwrap_or_default(),
        rows,
    })
}

/// Write the run manifest: the fully resolved config plus content hashes of
/// every emitted file.
pub fn write_manifest(
    dir: &Path,
    config_lines: &[(String, String)],
    files: &[EmittedFile],
    notes: &[(String, String)],
) -> CliResult<PathBuf> {
    let mut out = String::new();
    writeln!(out, "# run manifest").expect("string write");
    writeln!(out, "[config]").expect("string write");
    for (k, v) in config_lines {
        writeln!(out, "{k} = {v}").expect("string write");
    }
    if !notes.is_empty() {
        writeln!(out, "[results]").expect("string write");
        for (k, v) in notes {
            writeln!(out, "{k} = {v}").expect("string write");
        }
    }
    writeln!(out, "[files]").expect("string write");
    for f in files {
        writeln!(
            out,
            "{} bytes={} fnv1a64={:016x}",
            f.name, f.bytes, f.fnv1a64
        )
        .expect("string write");
    }
    fs::create_dir_all(dir)?;
    let path = dir.join("manifest.txt");
    fs::write(&path, out.as_bytes())?;
    Ok(path)
}
