//! Dense linear systems `A x (<=, =, >=) b` with variable bounds, and their
//! plain-text file format.
//!
//! ```text
//! m n
//! a_11 ... a_1n sense b_1
//! ...
//! a_m1 ... a_mn sense b_m
//! l_1 u_1        (optional block of n bound lines)
//! ...
//! ```
//!
//! `sense` is one of `<=`, `=`, `>=`; bounds accept `-inf` / `inf`. Without
//! a bounds block every variable is free. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

impl FromStr for Sense {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "<=" => Ok(Sense::Le),
            "=" | "==" => Ok(Sense::Eq),
            ">=" => Ok(Sense::Ge),
            other => Err(format!("unknown sense `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    num_rows: usize,
    num_vars: usize,
    /// Row-major, `num_rows * num_vars`.
    coeffs: Vec<f64>,
    rhs: Vec<f64>,
    senses: Vec<Sense>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearSystem {
    /// Builds a system with all variables free.
    pub fn new(
        num_vars: usize,
        rows: Vec<Vec<f64>>,
        senses: Vec<Sense>,
        rhs: Vec<f64>,
    ) -> Result<Self> {
        let lower = vec![f64::NEG_INFINITY; num_vars];
        let upper = vec![f64::INFINITY; num_vars];
        Self::with_bounds(num_vars, rows, senses, rhs, lower, upper)
    }

    pub fn with_bounds(
        num_vars: usize,
        rows: Vec<Vec<f64>>,
        senses: Vec<Sense>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let num_rows = rows.len();
        if senses.len() != num_rows || rhs.len() != num_rows {
            return Err(Error::InvalidInput(format!(
                "{num_rows} rows but {} senses and {} right-hand sides",
                senses.len(),
                rhs.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(num_rows * num_vars);
        for row in rows {
            coeffs.extend(row);
        }
        Self::from_parts(num_rows, num_vars, coeffs, senses, rhs, lower, upper)
    }

    fn from_parts(
        num_rows: usize,
        num_vars: usize,
        coeffs: Vec<f64>,
        senses: Vec<Sense>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let sys = LinearSystem {
            num_rows,
            num_vars,
            coeffs,
            rhs,
            senses,
            lower,
            upper,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.num_rows, self.num_vars);
        if self.coeffs.len() != m * n {
            return Err(Error::InvalidInput(format!(
                "coefficient matrix has {} entries, expected {m} x {n}",
                self.coeffs.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidInput("bounds do not match variable count".into()));
        }
        for j in 0..n {
            if !(self.lower[j] <= self.upper[j]) {
                return Err(Error::InvalidInput(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        for i in 0..m {
            let row = self.row(i);
            if row.iter().any(|v| !v.is_finite()) || !self.rhs[i].is_finite() {
                return Err(Error::InvalidInput(format!("row {i} has a non-finite entry")));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidInput(format!("row {i} has no nonzero coefficient")));
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// The system restricted to `rows`, in the given order.
    pub fn subsystem(&self, rows: &[usize]) -> LinearSystem {
        let mut coeffs = Vec::with_capacity(rows.len() * self.num_vars);
        for &i in rows {
            coeffs.extend_from_slice(self.row(i));
        }
        LinearSystem {
            num_rows: rows.len(),
            num_vars: self.num_vars,
            coeffs,
            rhs: rows.iter().map(|&i| self.rhs[i]).collect(),
            senses: rows.iter().map(|&i| self.senses[i]).collect(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    /// Largest violation of row `i` at `x` (zero when satisfied).
    pub fn row_violation(&self, i: usize, x: &[f64]) -> f64 {
        let act: f64 = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        let b = self.rhs[i];
        match self.senses[i] {
            Sense::Le => (act - b).max(0.0),
            Sense::Ge => (b - act).max(0.0),
            Sense::Eq => (act - b).abs(),
        }
    }

    /// Parses the text format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `m n` header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: hline,
                msg: format!("bad header: {e}"),
            })?;
        let [m, n] = dims[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `m n`".into(),
            });
        };

        let mut coeffs = Vec::with_capacity(m * n);
        let mut senses = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, text) = lines.next().ok_or(Error::Parse {
                line: hline,
                msg: format!("expected {m} constraint rows"),
            })?;
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() != n + 2 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", n + 2, toks.len()),
                });
            }
            for t in &toks[..n] {
                coeffs.push(parse_real(t, line)?);
            }
            senses.push(toks[n].parse().map_err(|msg| Error::Parse { line, msg })?);
            rhs.push(parse_real(toks[n + 1], line)?);
        }

        let rest: Vec<(usize, &str)> = lines.collect();
        let (lower, upper) = if rest.is_empty() {
            (vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
        } else if rest.len() == n {
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            for (line, text) in rest {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "bound lines must be `l u`".into(),
                    });
                }
                lower.push(parse_real(toks[0], line)?);
                upper.push(parse_real(toks[1], line)?);
            }
            (lower, upper)
        } else {
            return Err(Error::Parse {
                line: rest[0].0,
                msg: format!("expected 0 or {n} bound lines, found {}", rest.len()),
            });
        };

        Self::from_parts(m, n, coeffs, senses, rhs, lower, upper)
    }

    /// Writes the text format. Numbers use Rust's shortest round-trip
    /// formatting, so `parse(to_text(s)) == s` exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_rows, self.num_vars);
        for i in 0..self.num_rows {
            let mut fields: Vec<String> = self.row(i).iter().map(|v| fmt_real(*v)).collect();
            fields.push(self.senses[i].to_string());
            fields.push(fmt_real(self.rhs[i]));
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        for j in 0..self.num_vars {
            out.push_str(&format!(
                "{} {}\n",
                fmt_real(self.lower[j]),
                fmt_real(self.upper[j])
            ));
        }
        out
    }
}

/// Parses a dense vector: one number per line, blank lines and `#`
/// comments ignored.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_real(line, k + 1)?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: k + 1,
                msg: "vector entries must be finite".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

pub(crate) fn parse_real(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" | "+inf" | "Inf" | "+Inf" => Ok(f64::INFINITY),
        "-inf" | "-Inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("`{tok}` is not a number"),
            }),
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
