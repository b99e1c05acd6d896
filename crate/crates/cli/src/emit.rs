//! Row serialization: 12-significant-digit numbers, CSV and JSON rendering,
//! atomic file writes.

use crate::config::RunConfig;
use crate::CliError;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Rounds to 12 significant digits. Emitted numbers pass through this in
/// both formats, so a CSV cell and the matching JSON number always agree.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - magnitude);
    (x * scale).round() / scale
}

/// Locale-free decimal rendering of a rounded value. Rust's float display is
/// the shortest digit string that round-trips, which is deterministic and
/// never grows past the 12 significant digits the rounding left behind.
pub fn cell(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        "0".to_string() // collapse -0 as well
    } else {
        format!("{r}")
    }
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

/// One command's worth of output: a CSV header, the rows (already rounded),
/// and how many underlying records carried warnings.
pub struct RowSet {
    pub header: &'static str,
    pub csv_rows: Vec<String>,
    pub json_rows: Vec<serde_json::Value>,
    pub warned_records: usize,
}

impl RowSet {
    pub fn new(header: &'static str) -> Self {
        RowSet {
            header,
            csv_rows: Vec::new(),
            json_rows: Vec::new(),
            warned_records: 0,
        }
    }

    pub fn push<R: Serialize>(&mut self, row: &R, csv_line: String) {
        self.csv_rows.push(csv_line);
        self.json_rows
            .push(serde_json::to_value(row).expect("rows serialize"));
    }

    pub fn len(&self) -> usize {
        self.csv_rows.len()
    }
}

/// The full output text: a provenance header echoing the resolved
/// configuration, then the data.
pub fn render(config: &RunConfig, rows: &RowSet) -> String {
    let echo = serde_json::to_string(config).expect("config serializes");
    match config.format {
        crate::config::FormatArg::Csv => {
            let mut text = String::new();
            text.push_str("# config ");
            text.push_str(&echo);
            text.push('\n');
            text.push_str(rows.header);
            text.push('\n');
            for row in &rows.csv_rows {
                text.push_str(row);
                text.push('\n');
            }
            text
        }
        crate::config::FormatArg::Json => {
            let doc = serde_json::json!({
                "config": config,
                "rows": rows.json_rows,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
            text.push('\n');
            text
        }
    }
}

/// Writes through a temporary file in the target directory and renames into
/// place, so readers never observe a half-written result.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new("."))).map_err(|e| {
            CliError::Io(format!(
                "cannot create temporary file near {}: {e}",
                path.display()
            ))
        })?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    // Temp files are born 0600; loosen to ordinary data-file permissions so
    // the rename does not leave an unreadable result behind.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let _ = tmp
            .as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644));
    }
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot move output into {}: {e}", path.display())))?;
    Ok(())
}
