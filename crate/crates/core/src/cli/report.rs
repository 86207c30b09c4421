//! Report serialization: JSON documents, flat CSV tables and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::kfunc::KProfile;
use crate::lab::InequalityReport;
use crate::params::CknTuple;

pub const CSV_COLUMNS: [&str; 15] =
    ["kind", "n", "p", "q", "r", "a", "b", "c", "lambda", "theta", "lhs", "rhs", "ratio", "err", "verdict"];

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn tuple_cells(t: &CknTuple) -> [String; 8] {
    [
        num(t.s_p.p()),
        num(t.s_q.p()),
        num(t.s_r.p()),
        num(t.a),
        num(t.b),
        num(t.c),
        num(t.lambda),
        num(t.theta),
    ]
}

fn csv_line(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

/// Header plus one row per report.
pub fn reports_csv(reports: &[&InequalityReport]) -> String {
    let mut out = csv_line(&CSV_COLUMNS.map(String::from));
    for r in reports {
        let mut cells = vec![r.kind.name().to_string(), r.tuple.n.to_string()];
        cells.extend(tuple_cells(&r.tuple));
        cells.extend([num(r.lhs), num(r.rhs), num(r.empirical_ratio), num(r.ratio_err), r.verdict.to_string()]);
        out.push_str(&csv_line(&cells));
    }
    out
}

/// One row per tuple with empty value columns and an admissibility verdict.
pub fn tuple_csv(kind: &str, t: &CknTuple, verdict: &str) -> String {
    let mut out = csv_line(&CSV_COLUMNS.map(String::from));
    let mut cells = vec![kind.to_string(), t.n.to_string()];
    cells.extend(tuple_cells(t));
    cells.extend([String::new(), String::new(), String::new(), String::new(), verdict.to_string()]);
    out.push_str(&csv_line(&cells));
    out
}

/// Two columns `t,K` for plotting.
pub fn profile_csv(p: &KProfile) -> String {
    let mut out = String::from("t,K\n");
    for (t, k) in p.t_grid.iter().zip(&p.k_values) {
        let _ = writeln!(out, "{},{}", num(*t), num(*k));
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn tuple_row_has_all_columns() {
        let csv = tuple_csv("classical_hardy", &CknTuple::hardy(0.5, 3), "admissible");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), CSV_COLUMNS.len());
    }
}
