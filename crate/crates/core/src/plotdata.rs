//! Byte-stable CSV emission for reports.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! `.` as decimal separator and `\n` line endings.

use std::io::Write;
use std::path::Path;

use crate::scalar::Real;

pub trait PlotData {
    fn header(&self) -> &'static str;
    fn rows(&self) -> Vec<String>;

    fn to_csv(&self) -> String {
        let mut out = String::from(self.header());
        out.push('\n');
        for r in self.rows() {
            out.push_str(&r);
            out.push('\n');
        }
        out
    }
}

pub fn fmt_float<T: Real>(x: T) -> String {
    let v = x.to_f64_lossy();
    if v == 0.0 {
        // normalizes -0
        return format!("{:.16e}", 0.0f64);
    }
    format!("{v:.16e}")
}

pub fn emit_plotdata(report: &dyn PlotData, path: &Path) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(report.to_csv().as_bytes())
}
