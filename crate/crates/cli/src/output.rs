//! CSV and JSON writers. Floats use 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use viscosity::GridFn;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[f64]) {
        let line: Vec<String> = cells.iter().map(|v| num(*v)).collect();
        self.text += &line.join(",");
        self.text.push('\n');
    }

    /// A row whose leading cells are preformatted.
    pub fn row_with(&mut self, lead: &[String], cells: &[f64]) {
        let mut parts: Vec<String> = lead.to_vec();
        parts.extend(cells.iter().map(|v| num(*v)));
        let _ = writeln!(self.text, "{}", parts.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        fs::write(path, &self.text).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

pub fn coord_names(dim: usize) -> Vec<&'static str> {
    ["x", "y", "z"][..dim].to_vec()
}

/// `x[, y, z], u` per node.
pub fn grid_fn_csv(u: &GridFn, value: &str) -> Csv {
    let g = u.grid();
    let mut header = coord_names(g.dim());
    header.push(value);
    let mut csv = Csv::new(&header);
    let mut row = vec![0.0; g.dim() + 1];
    for i in 0..g.len() {
        g.point_into(i, &mut row[..g.dim()]);
        row[g.dim()] = u.get(i);
        csv.row(&row);
    }
    csv
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
