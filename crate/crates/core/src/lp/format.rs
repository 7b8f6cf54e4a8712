use std::fmt::Write;

use super::LpProblem;

fn term(out: &mut String, coeff: f64, name: &str, first: bool) {
    if coeff >= 0.0 && !first {
        let _ = write!(out, " + {coeff} {name}");
    } else if coeff < 0.0 {
        let _ = write!(out, " - {} {name}", -coeff);
    } else {
        let _ = write!(out, " {coeff} {name}");
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Renders the problem in CPLEX LP text format, for cross-checking against
/// external solvers. Variables are named `x0..`, rows `r0..`.
pub fn write_lp_format(p: &LpProblem) -> String {
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in p.cost.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, c, &format!("x{j}"), first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for i in 0..p.num_rows() {
        let (lo, hi) = (p.row_lower[i], p.row_upper[i]);
        if !lo.is_finite() && !hi.is_finite() {
            continue;
        }
        let mut lhs = String::new();
        let mut first = true;
        for j in 0..p.num_cols() {
            let a = p.coeff(i, j);
            if a != 0.0 {
                term(&mut lhs, a, &format!("x{j}"), first);
                first = false;
            }
        }
        if first {
            lhs.push_str(" 0 x0");
        }
        if lo == hi {
            let _ = writeln!(out, " r{i}:{lhs} = {lo}");
        } else {
            if lo.is_finite() {
                let _ = writeln!(out, " r{i}_lo:{lhs} >= {lo}");
            }
            if hi.is_finite() {
                let _ = writeln!(out, " r{i}_hi:{lhs} <= {hi}");
            }
        }
    }
    out.push_str("Bounds\n");
    for j in 0..p.num_cols() {
        let (lo, hi) = (p.col_lower[j], p.col_upper[j]);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " x{j} free");
        } else {
            let _ = writeln!(out, " {} <= x{j} <= {}", bound(lo), bound(hi));
        }
    }
    out.push_str("End\n");
    out
}
