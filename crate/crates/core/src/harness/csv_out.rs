//! Sweep results as CSV.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so every value
//! survives a write/read cycle bit-exactly. `alpha` is empty for HSIC rows.

use std::fs;
use std::path::Path;

use super::{MeasureSpec, SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::pairs::SelectionMode;

pub const CSV_HEADER: &str = "model,measure,mode,alpha,L,gamma_db,trials,mean,std";

pub fn to_csv_string(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let alpha = r.alpha.map(|a| format!("{a:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{:.16e},{},{:.16e},{:.16e}\n",
            r.model, r.measure, r.mode, alpha, r.len, r.gamma_db, r.trials, r.mean, r.std
        ));
    }
    out
}

pub fn write_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(result)).map_err(|e| Error::io(path, e))
}

fn parse_mode(s: &str) -> Option<SelectionMode> {
    [SelectionMode::Confounder, SelectionMode::Random, SelectionMode::Complete]
        .into_iter()
        .find(|m| m.as_str() == s)
}

/// Parses CSV text produced by [`to_csv_string`]. `origin` only labels errors.
pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<SweepRow>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(err(1, format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(err(n, format!("expected 9 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(n, format!("bad number {s:?}")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(n, format!("bad integer {s:?}")));
        rows.push(SweepRow {
            model: f[0].parse().map_err(|e: Error| err(n, e.to_string()))?,
            measure: f[1].parse::<MeasureSpec>().map_err(|e| err(n, e.to_string()))?,
            mode: parse_mode(f[2]).ok_or_else(|| err(n, format!("bad mode {:?}", f[2])))?,
            alpha: if f[3].is_empty() { None } else { Some(num(f[3])?) },
            len: int(f[4])?,
            gamma_db: num(f[5])?,
            trials: int(f[6])?,
            mean: num(f[7])?,
            std: num(f[8])?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}
