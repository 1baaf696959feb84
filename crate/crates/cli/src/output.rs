//! Result-file formatting: CSV tables with round-trip-exact numbers and the
//! human-readable summary.

use std::io::Write;
use std::path::Path;

use bdsim_core::{Error, Result};

/// 17 significant digits: round-trip exact for 64-bit floats.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table accumulated in memory and written atomically.
pub struct CsvTable {
    header: String,
    rows: Vec<String>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> CsvTable {
        CsvTable { header: columns.join(","), rows: Vec::new() }
    }

    pub fn push_row(&mut self, cells: &[String]) {
        self.rows.push(cells.join(","));
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = String::with_capacity(self.rows.len() * 32 + self.header.len() + 1);
        s.push_str(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s.into_bytes()
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)
        .map_err(|e| Error::Configuration(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::Configuration(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
