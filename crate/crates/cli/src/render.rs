//! Text and CSV views of a [`ReportDocument`].

use std::fmt::Write;

use crate::report::ReportDocument;

const UNDERLINE: char = '\u{0332}';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

pub fn render(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Json => doc.to_json() + "\n",
        Format::Text => text(doc),
        Format::Csv => csv(doc),
    }
}

/// Groups the fractional digits in fives and underlines the first `stable`
/// significant digits with a combining low line.
pub fn decorate(value: &str, stable: usize) -> String {
    let (int_part, frac) = value.split_once('.').unwrap_or((value, ""));
    let mut out = String::new();
    let mut seen = 0;
    let mut push_digit = |out: &mut String, c: char| {
        out.push(c);
        if c.is_ascii_digit() {
            seen += 1;
            if seen <= stable {
                out.push(UNDERLINE);
            }
        }
    };
    for c in int_part.chars() {
        push_digit(&mut out, c);
    }
    if !frac.is_empty() {
        out.push('.');
        for (i, c) in frac.chars().enumerate() {
            if i > 0 && i % 5 == 0 {
                out.push(' ');
            }
            push_digit(&mut out, c);
        }
    }
    out
}

/// Two significant figures, as in `0.0048s`, `1.4s`, `130s`.
pub fn seconds(t: f64) -> String {
    if t <= 0.0 {
        return "0s".into();
    }
    let magnitude = t.log10().floor() as i32;
    let decimals = (1 - magnitude).max(0) as usize;
    let factor = 10f64.powi(magnitude - 1);
    let rounded = (t / factor).round() * factor;
    format!("{rounded:.decimals$}s")
}

fn text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    if let Some(name) = &doc.config_name {
        let _ = writeln!(out, "{} ({})", name, doc.command);
    }
    if let Some(c) = doc.contraction {
        let _ = writeln!(out, "contraction: {}", if c { "verified" } else { "not verified" });
    }
    for c in &doc.certificates {
        let _ = writeln!(out, "certificate k={}: {}", c.k, c.kind);
        for d in &c.details {
            let _ = writeln!(out, "    {d}");
        }
    }
    if let Some(c) = doc.certified {
        let _ = writeln!(out, "certified: {c}");
    }
    for b in &doc.brackets {
        match &b.error {
            Some(e) => {
                let _ = writeln!(out, "bracket k={}: {e}", b.k);
            }
            None => {
                let _ = writeln!(
                    out,
                    "bracket k={}: rho_k = {}, rho_k+1 = {}, holds = {}, signs = {:?}",
                    b.k,
                    b.rho_k.as_deref().unwrap_or("-"),
                    b.rho_k_plus_1.as_deref().unwrap_or("-"),
                    b.bracket_holds,
                    b.sign_pattern
                );
            }
        }
    }
    if let Some(solve) = &doc.solve {
        let _ = writeln!(
            out,
            "k = {}, {} bits, {} reduction, tolerance {}",
            solve.k, solve.precision_bits, solve.reduction_mode, solve.tolerance
        );
        let _ = writeln!(
            out,
            "{:>3}  {:<48}  CPU time",
            "n", "Approximation to affinity dimension"
        );
        for row in solve.rows.iter().filter(|r| r.status == "ok") {
            let value = row.value.as_deref().unwrap_or("");
            let shown = decorate(value, row.stable_digits.unwrap_or(0));
            let pad = 48usize.saturating_sub(shown.chars().filter(|&c| c != UNDERLINE).count());
            let _ = writeln!(
                out,
                "{:>3}  {}{}  {}",
                row.n,
                shown,
                " ".repeat(pad),
                seconds(row.elapsed_seconds)
            );
        }
    }
    if let Some(disc) = &doc.discretize {
        let _ = writeln!(out, "NON-RIGOROUS discretization estimates");
        let _ = writeln!(out, "{:>9}  {:<13}  CPU time", "Mesh size", "Approximation");
        for row in &disc.rows {
            match row.value {
                Some(v) => {
                    let text = format!("{v:.8}");
                    let pad = 13usize.saturating_sub(text.len());
                    let _ = writeln!(
                        out,
                        "{:>9}  {}{}  {}",
                        row.mesh_size,
                        decorate_plain(&text, row.stable_digits.unwrap_or(0)),
                        " ".repeat(pad),
                        seconds(row.elapsed_seconds)
                    );
                }
                None => {
                    let _ = writeln!(out, "{:>9}  {}", row.mesh_size, row.error.as_deref().unwrap_or(""));
                }
            }
        }
    }
    if let Some(t) = &doc.trace_table {
        let _ = writeln!(
            out,
            "s = {}, k = {}, {} bits, {} reduction",
            t.s, t.k, t.precision_bits, t.reduction_mode
        );
        let _ = writeln!(out, "{:>3}  {:<50}  a_n", "n", "t_n");
        let _ = writeln!(out, "{:>3}  {:<50}  {}", 0, "", t.coefficients[0]);
        for (i, tn) in t.traces.iter().enumerate() {
            let flag = if t.precision_limited[i + 1] {
                "  (precision-limited)"
            } else {
                ""
            };
            let _ = writeln!(out, "{:>3}  {:<50}  {}{flag}", i + 1, tn, t.coefficients[i + 1]);
        }
    }
    for note in &doc.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if let Some(e) = &doc.error {
        let _ = writeln!(out, "error: {e}");
    }
    out
}

/// Underlining without digit grouping, for short values.
fn decorate_plain(value: &str, stable: usize) -> String {
    let mut out = String::new();
    let mut seen = 0;
    for c in value.chars() {
        out.push(c);
        if c.is_ascii_digit() {
            seen += 1;
            if seen <= stable {
                out.push(UNDERLINE);
            }
        }
    }
    out
}

fn csv(doc: &ReportDocument) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |v: Option<usize>| v.map(|d| d.to_string()).unwrap_or_default();
    let result = if let Some(solve) = &doc.solve {
        write_records(
            &mut w,
            &[
                "n",
                "approximation",
                "stable_digits",
                "secant_iterations",
                "elapsed_seconds",
                "status",
            ],
            solve.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.value.clone().unwrap_or_default(),
                    opt(r.stable_digits),
                    opt(r.secant_iterations),
                    r.elapsed_seconds.to_string(),
                    r.status.clone(),
                ]
            }),
        )
    } else if let Some(disc) = &doc.discretize {
        write_records(
            &mut w,
            &[
                "mesh_size",
                "approximation",
                "stable_digits",
                "elapsed_seconds",
                "non_rigorous",
            ],
            disc.rows.iter().map(|r| {
                vec![
                    r.mesh_size.to_string(),
                    r.value.map(|v| format!("{v:.8}")).unwrap_or_default(),
                    opt(r.stable_digits),
                    r.elapsed_seconds.to_string(),
                    r.non_rigorous.to_string(),
                ]
            }),
        )
    } else if let Some(t) = &doc.trace_table {
        let first = std::iter::once(vec![
            "0".into(),
            String::new(),
            t.coefficients[0].clone(),
            "false".into(),
        ]);
        let rest = t.traces.iter().enumerate().map(|(i, tn)| {
            vec![
                (i + 1).to_string(),
                tn.clone(),
                t.coefficients[i + 1].clone(),
                t.precision_limited[i + 1].to_string(),
            ]
        });
        write_records(&mut w, &["n", "t_n", "a_n", "precision_limited"], first.chain(rest))
    } else if !doc.brackets.is_empty() && doc.certificates.is_empty() {
        write_records(
            &mut w,
            &["k", "rho_k", "rho_k_plus_1", "bracket_holds", "sign_pattern", "error"],
            doc.brackets.iter().map(|b| {
                let signs: Vec<String> = b.sign_pattern.iter().map(|s| s.to_string()).collect();
                vec![
                    b.k.to_string(),
                    b.rho_k.clone().unwrap_or_default(),
                    b.rho_k_plus_1.clone().unwrap_or_default(),
                    b.bracket_holds.to_string(),
                    signs.join(" "),
                    b.error.clone().unwrap_or_default(),
                ]
            }),
        )
    } else {
        write_records(
            &mut w,
            &["k", "certificate", "verified"],
            doc.certificates
                .iter()
                .map(|c| vec![c.k.to_string(), c.kind.clone(), c.verified.to_string()]),
        )
    };
    result.expect("writing CSV to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("UTF-8 CSV")
}

fn write_records(
    w: &mut csv::Writer<Vec<u8>>,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> csv::Result<()> {
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_and_underline() {
        let s = decorate("1.1156032577", 7);
        assert_eq!(s, "1\u{332}.1\u{332}1\u{332}5\u{332}6\u{332}0\u{332} 3\u{332}2577");
        assert_eq!(decorate("1.44", 0), "1.44");
    }

    #[test]
    fn two_significant_figures() {
        assert_eq!(seconds(0.00483), "0.0048s");
        assert_eq!(seconds(1.37), "1.4s");
        assert_eq!(seconds(131.0), "130s");
        assert_eq!(seconds(0.63), "0.63s");
    }
}
