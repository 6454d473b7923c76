//! CSV helpers: `%.17g` number formatting, field dumps, and small tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Formats like C's `%.17g`: 17 significant digits, exponent form when the
/// decimal exponent is below -4 or at least 17, trailing zeros stripped.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header `x1,...,xN,value`, one row per node.
pub fn field_to_csv(field: &Field) -> String {
    let grid = field.grid();
    let dim = grid.dim();
    let mut out = String::new();
    for axis in 1..=dim {
        let _ = write!(out, "x{axis},");
    }
    out.push_str("value\n");
    for (idx, v) in field.values().iter().enumerate() {
        let x = grid.point(idx);
        for c in &x[..dim] {
            out.push_str(&fmt_g17(*c));
            out.push(',');
        }
        out.push_str(&fmt_g17(*v));
        out.push('\n');
    }
    out
}

pub fn write_field_csv(field: &Field, path: &Path) -> Result<()> {
    fs::write(path, field_to_csv(field))?;
    Ok(())
}

/// Reads `x1,...,xN,value` rows (header optional). Every row must have the
/// same number of columns.
pub fn read_point_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(Error::Config(format!(
                    "{}: line {} is not numeric",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Config(format!(
                    "{}: line {} has {} columns, expected {w}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

/// A small CSV table with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_g17(*v)).collect());
    }

    pub fn push_raw(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header(&self) -> String {
        self.header.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(1e16), "10000000000000000");
        assert_eq!(fmt_g17(1e17), "1e+17");
    }

    #[test]
    fn g17_roundtrips() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, -7.25e-12, 6.02214076e23] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn field_dump_header_and_rows() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = Field::constant(g, Boundary::Periodic, 0.5);
        let csv = field_to_csv(&f);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2,value"));
        assert_eq!(lines.next(), Some("-1,-1,0.5"));
        assert_eq!(csv.lines().count(), 1 + 256);
    }
}
