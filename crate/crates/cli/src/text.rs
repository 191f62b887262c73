//! Plain-text rendering of reports as aligned tables.

use std::fmt::Write;

use graphkms::oracle::{Outcome, VerificationReport};

use crate::report::{AnalysisReport, GraphSummary, SimplexReport};

/// Left-aligned columns separated by two spaces, trailing blanks trimmed.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let mut line = String::new();
        for (cell, w) in row.iter().zip(&widths) {
            let _ = write!(line, "{cell:<w$}  ");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn set(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn real(x: f64) -> String {
    format!("{x}")
}

fn polynomial(coeffs: &[i128]) -> String {
    let degree = coeffs.len() - 1;
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate() {
        let power = degree - i;
        if c == 0 && power != degree {
            continue;
        }
        let sign = if c < 0 { "-" } else { "+" };
        if out.is_empty() {
            if c < 0 {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let abs = c.unsigned_abs();
        let coeff = if abs == 1 && power > 0 { String::new() } else { abs.to_string() };
        let _ = match power {
            0 => write!(out, "{abs}"),
            1 => write!(out, "{coeff}x"),
            _ => write!(out, "{coeff}x^{power}"),
        };
    }
    out
}

fn graph_section(g: &GraphSummary, out: &mut String) {
    let total: u64 = g.edges.iter().map(|e| u64::from(e.multiplicity)).sum();
    let _ = writeln!(out, "vertices: {}   edges: {total}", g.vertices.len());
    let _ = writeln!(out, "\ncomponents (Seneta order):");
    let rows: Vec<Vec<String>> = g
        .seneta_order
        .iter()
        .map(|&id| {
            let c = &g.components[id];
            vec![
                id.to_string(),
                set(&c.members),
                if c.trivial { "trivial".into() } else { real(c.spectral_radius) },
                c.log_radius.map_or("-".into(), real),
                c.period.map_or("-".into(), |p| p.to_string()),
                polynomial(&c.characteristic_polynomial),
            ]
        })
        .collect();
    out.push_str(&table(&["id", "members", "rho", "ln rho", "period", "char poly"], &rows));
    let mc: Vec<String> = g.minimal_critical.iter().map(|&c| set(&g.components[c].members)).collect();
    if !mc.is_empty() {
        let _ = writeln!(out, "\nminimal critical: {}", mc.join(" "));
    }
}

pub fn analysis(report: &AnalysisReport) -> String {
    let mut out = String::new();
    graph_section(&report.graph, &mut out);
    out.push('\n');
    if report.criticals.is_empty() {
        out.push_str("no cycles; no critical temperatures\n");
    } else {
        out.push_str("critical temperatures:\n");
        let rows: Vec<Vec<String>> = report
            .criticals
            .iter()
            .map(|c| vec![real(c.beta), c.beta_definition.clone(), set(&c.members)])
            .collect();
        out.push_str(&table(&["beta", "definition", "component"], &rows));
    }
    out.push_str("\nbeta_v:\n");
    let rows: Vec<Vec<String>> = report
        .graph
        .beta_v
        .iter()
        .map(|(v, b)| vec![v.clone(), b.map_or("-inf".into(), real)])
        .collect();
    out.push_str(&table(&["vertex", "beta_v"], &rows));
    if let Some(simplex) = &report.simplex {
        out.push('\n');
        out.push_str(&simplex_text(simplex, &report.graph.vertices));
    }
    out
}

pub fn simplex_text(s: &SimplexReport, vertices: &[String]) -> String {
    let mut out = String::new();
    match &s.beta_definition {
        Some(def) => {
            let _ = writeln!(out, "beta = {} ({def})", real(s.beta));
        }
        None => {
            let _ = writeln!(out, "beta = {}", real(s.beta));
        }
    }
    let _ = writeln!(
        out,
        "case: {}   dimension: {}   graph algebra dimension: {}",
        s.case, s.dimension, s.graph_algebra_dimension
    );
    let _ = write!(out, "H_beta: {}", set(&s.h_beta));
    if let Some(k) = &s.k_beta {
        let _ = write!(out, "   K_beta: {}", set(k));
    }
    out.push('\n');
    if s.extremes.is_empty() {
        out.push_str("no KMS states\n");
        return out;
    }
    out.push_str("\nextreme states:\n");
    let mut header = vec!["label", "type", "factors"];
    header.extend(vertices.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = s
        .extremes
        .iter()
        .map(|e| {
            let mut row = vec![
                e.label.clone(),
                e.state_type.clone(),
                if e.factors_through_graph_algebra { "yes" } else { "no" }.into(),
            ];
            row.extend(vertices.iter().map(|v| real(e.m[v])));
            row
        })
        .collect();
    out.push_str(&table(&header, &rows));
    out
}

pub fn verification(report: &VerificationReport, labels: &[String]) -> String {
    if report.results.is_empty() {
        return "no extreme states; nothing to check\n".into();
    }
    let rows: Vec<Vec<String>> = report
        .results
        .iter()
        .map(|r| {
            let outcome = match &r.outcome {
                Outcome::Pass => "pass".to_owned(),
                Outcome::Fail(why) => format!("FAIL: {why}"),
                Outcome::Skipped(why) => format!("skipped: {why}"),
            };
            vec![labels[r.state].clone(), r.check.clone(), outcome]
        })
        .collect();
    let mut out = table(&["state", "check", "outcome"], &rows);
    let failed = report.failures().count();
    let _ = writeln!(out, "\n{} checks, {failed} failed", report.results.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align() {
        let t = table(&["a", "bb"], &[vec!["long".into(), "x".into()], vec!["s".into(), "yyy".into()]]);
        assert_eq!(t, "a     bb\nlong  x\ns     yyy\n");
    }

    #[test]
    fn polynomials_read_naturally() {
        assert_eq!(polynomial(&[1, -5, 5]), "x^2 - 5x + 5");
        assert_eq!(polynomial(&[1, -2]), "x - 2");
        assert_eq!(polynomial(&[1, 0, -1]), "x^2 - 1");
        assert_eq!(polynomial(&[1, 0]), "x");
        assert_eq!(polynomial(&[1]), "1");
    }
}
