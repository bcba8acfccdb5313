//! CSV and key–value writers with the shared `#` metadata header.
//!
//! Header lines, in order:
//!
//! ```text
//! # xent <version> <command>
//! # units: <column>=<unit>, ...
//! # grid: n_q=.. q_max=.. n_omega=.. omega_max=..
//! # config_sha256: <hex>
//! # config: <line of the resolved run configuration>
//! # crystal: <line of the crystal data>
//! ```
//!
//! followed by the column names and the rows. Floats are written as `{:.9e}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use xent_core::SimGrid;

use crate::error::CliError;

/// Everything the header needs, shared by the files of one run.
pub struct Meta {
    pub command: &'static str,
    pub config: String,
    pub crystal: String,
    pub grid: Option<String>,
}

impl Meta {
    pub fn new(command: &'static str, config: String, crystal: String) -> Self {
        Meta {
            command,
            config,
            crystal,
            grid: None,
        }
    }

    pub fn with_grid(mut self, grid: &SimGrid) -> Self {
        self.grid = Some(format!(
            "n_q={} q_max={:e} n_omega={} omega_max={:e}",
            grid.n_q(),
            grid.q_max(),
            grid.n_omega(),
            grid.omega_max()
        ));
        self
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config.as_bytes());
        h.update(b"\0");
        h.update(self.crystal.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn write_header(&self, out: &mut impl Write, units: &[(&str, &str)]) -> std::io::Result<()> {
        writeln!(out, "# xent {} {}", env!("CARGO_PKG_VERSION"), self.command)?;
        let units: Vec<String> = units.iter().map(|(c, u)| format!("{c}={u}")).collect();
        writeln!(out, "# units: {}", units.join(", "))?;
        writeln!(out, "# grid: {}", self.grid.as_deref().unwrap_or("none"))?;
        writeln!(out, "# config_sha256: {}", self.hash())?;
        for line in self.config.lines() {
            writeln!(out, "# config: {line}")?;
        }
        for line in self.crystal.lines() {
            writeln!(out, "# crystal: {line}")?;
        }
        Ok(())
    }
}

/// Row sink for one CSV file.
pub struct Csv {
    path: PathBuf,
    out: BufWriter<File>,
    width: usize,
}

impl Csv {
    /// `columns` are (name, unit) pairs.
    pub fn create(dir: &Path, name: &str, meta: &Meta, columns: &[(&str, &str)]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let names: Vec<&str> = columns.iter().map(|(c, _)| *c).collect();
        meta.write_header(&mut out, columns)
            .and_then(|_| writeln!(out, "{}", names.join(",")))
            .map_err(|e| CliError::io(&path, e))?;
        Ok(Csv {
            path,
            out,
            width: columns.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.width);
        let mut line = String::with_capacity(18 * values.len());
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.9e}"));
        }
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// `metric,value,unit` table.
pub fn write_summary(dir: &Path, name: &str, meta: &Meta, rows: &[(&str, f64, &str)]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = Vec::new();
    meta.write_header(&mut text, &[("metric", "-"), ("value", "see unit"), ("unit", "-")])
        .expect("writing to memory");
    text.extend_from_slice(b"metric,value,unit\n");
    for (metric, value, unit) in rows {
        text.extend_from_slice(format!("{metric},{value:.9e},{unit}\n").as_bytes());
    }
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Key–value report: header lines then the document body.
pub fn write_report(dir: &Path, name: &str, meta: &Meta, body: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = Vec::new();
    meta.write_header(&mut text, &[]).expect("writing to memory");
    text.extend_from_slice(body.as_bytes());
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Scale to unit maximum; an all-zero input stays zero.
pub fn normalized(values: &[f64]) -> Vec<f64> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        values.iter().map(|v| v / peak).collect()
    } else {
        vec![0.0; values.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let meta = Meta::new("test", "[run]\ngain = 0.001\n".into(), "name = x\n".into());
        let mut csv = Csv::create(dir.path(), "a.csv", &meta, &[("t_fs", "fs"), ("i", "arb")]).unwrap();
        csv.row(&[1.0, -0.5]).unwrap();
        let path = csv.finish().unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# xent "));
        assert_eq!(lines[1], "# units: t_fs=fs, i=arb");
        assert_eq!(lines[2], "# grid: none");
        assert_eq!(lines[3], format!("# config_sha256: {}", meta.hash()));
        assert_eq!(lines[4], "# config: [run]");
        assert_eq!(lines[6], "# crystal: name = x");
        assert_eq!(lines[7], "t_fs,i");
        assert_eq!(lines[8], "1.000000000e0,-5.000000000e-1");
    }

    #[test]
    fn hash_depends_on_both_inputs() {
        let a = Meta::new("x", "a".into(), "b".into());
        let b = Meta::new("x", "a".into(), "c".into());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn normalization_of_zeros() {
        assert_eq!(normalized(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(normalized(&[1.0, 4.0]), vec![0.25, 1.0]);
    }
}
