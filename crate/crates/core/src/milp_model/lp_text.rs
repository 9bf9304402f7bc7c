//! LP text format: writer and the matching reader.
//!
//! The writer emits the industry-standard sections (objective, Subject To,
//! Bounds, Binary, End) with one row per line, deterministic ordering
//! (declaration order) and 17-significant-digit numbers, so a write/parse
//! round trip reproduces every coefficient bit-exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::milp_model::{MilpProblem, Relation, Sense};

/// Full-precision decimal form: 17 significant digits round-trip any f64.
fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_terms(out: &mut String, terms: &[(String, f64)]) {
    for (i, (name, coef)) in terms.iter().enumerate() {
        if i == 0 {
            let _ = write!(out, "{} {}", fmt_full(*coef), name);
        } else if *coef < 0.0 {
            let _ = write!(out, " - {} {}", fmt_full(-coef), name);
        } else {
            let _ = write!(out, " + {} {}", fmt_full(*coef), name);
        }
    }
}

/// Serializes a problem in LP text form.
pub fn write_lp(problem: &MilpProblem) -> String {
    let mut out = String::new();
    out.push_str(match problem.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    if !problem.objective_terms().is_empty() {
        out.push(' ');
        write_terms(&mut out, problem.objective_terms());
    }
    out.push_str("\nSubject To\n");
    for con in problem.constraints() {
        let _ = write!(out, " {}: ", con.name);
        write_terms(&mut out, &con.terms);
        let _ = writeln!(out, " {} {}", con.relation.as_str(), fmt_full(con.rhs));
    }
    out.push_str("Bounds\n");
    for var in problem.continuous() {
        let line = match (var.lower.is_finite(), var.upper.is_finite()) {
            (true, true) if var.lower == var.upper => {
                format!(" {} = {}", var.name, fmt_full(var.lower))
            }
            (true, true) => format!(
                " {} <= {} <= {}",
                fmt_full(var.lower),
                var.name,
                fmt_full(var.upper)
            ),
            (true, false) => format!(" {} >= {}", var.name, fmt_full(var.lower)),
            (false, true) => format!(" {} <= {}", var.name, fmt_full(var.upper)),
            (false, false) => format!(" {} free", var.name),
        };
        out.push_str(&line);
        out.push('\n');
    }
    if !problem.binaries().is_empty() {
        out.push_str("Binary\n");
        for name in problem.binaries() {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective(Sense),
    Constraints,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    match lower.as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective(Sense::Minimize)),
        "maximize" | "maximise" | "max" => Some(Section::Objective(Sense::Maximize)),
        "subject to" | "such that" | "st" | "s.t." | "st:" => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_number(token: &str) -> Option<f64> {
    match token.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => token.parse::<f64>().ok(),
    }
}

fn is_name(token: &str) -> bool {
    token
        .chars()
        .next()
        .map_or(false, |c| c.is_ascii_alphabetic() || c == '_')
}

/// Parses a term list `c1 v1 + c2 v2 - c3 v3 ...`; coefficients optional
/// (default 1). Consumes tokens until a relation token or the end.
fn parse_terms<'a>(
    tokens: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>,
) -> Result<Vec<(String, f64)>> {
    let mut terms: Vec<(String, f64)> = Vec::new();
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    while let Some(&token) = tokens.peek() {
        if matches!(token, "<=" | ">=" | "=" | "<" | ">") {
            break;
        }
        let token = tokens.next().unwrap();
        match token {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Some(v) = parse_number(token) {
                    if pending.is_some() {
                        return Err(Error::Format(format!(
                            "two consecutive numbers near '{token}'"
                        )));
                    }
                    pending = Some(v);
                } else if is_name(token) {
                    let coef = sign * pending.take().unwrap_or(1.0);
                    terms.push((token.to_string(), coef));
                    sign = 1.0;
                } else {
                    return Err(Error::Format(format!("unexpected token '{token}'")));
                }
            }
        }
    }
    if pending.is_some() {
        return Err(Error::Format("dangling coefficient without variable".into()));
    }
    Ok(terms)
}

/// Parses the artifact's LP dialect (one row per line) back into a problem.
pub fn parse_lp(text: &str) -> Result<MilpProblem> {
    let mut sense = Sense::Minimize;
    let mut objective: Vec<(String, f64)> = Vec::new();
    let mut rows: Vec<(String, Vec<(String, f64)>, Relation, f64)> = Vec::new();
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut section: Option<Section> = None;
    let mut row_counter = 0usize;

    for raw in text.lines() {
        let line = match raw.find('\\') {
            Some(at) => &raw[..at],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            section = Some(s);
            if s == Section::End {
                break;
            }
            continue;
        }
        match section {
            Some(Section::Objective(s)) => {
                sense = s;
                let body = match line.find(':') {
                    Some(at) => line[at + 1..].trim(),
                    None => line,
                };
                if body.is_empty() {
                    continue;
                }
                let mut tokens = tokenize(body).into_iter().peekable();
                let mut terms = parse_terms(&mut tokens.by_ref())?;
                objective.append(&mut terms);
            }
            Some(Section::Constraints) => {
                let (name, body) = match line.find(':') {
                    Some(at) => (line[..at].trim().to_string(), line[at + 1..].trim()),
                    None => (format!("c{row_counter}"), line),
                };
                row_counter += 1;
                let token_vec = tokenize(body);
                let mut tokens = token_vec.into_iter().peekable();
                let terms = parse_terms(&mut tokens.by_ref())?;
                let relation = match tokens.next() {
                    Some("<=") | Some("<") => Relation::Le,
                    Some(">=") | Some(">") => Relation::Ge,
                    Some("=") => Relation::Eq,
                    other => {
                        return Err(Error::Format(format!(
                            "constraint '{name}' missing relation (got {other:?})"
                        )))
                    }
                };
                let rhs_token = tokens
                    .next()
                    .ok_or_else(|| Error::Format(format!("constraint '{name}' missing rhs")))?;
                let rhs = parse_number(rhs_token)
                    .ok_or_else(|| Error::Format(format!("bad rhs '{rhs_token}'")))?;
                if tokens.next().is_some() {
                    return Err(Error::Format(format!(
                        "trailing tokens after constraint '{name}'"
                    )));
                }
                rows.push((name, terms, relation, rhs));
            }
            Some(Section::Bounds) => {
                bounds.push(parse_bound_line(line)?);
            }
            Some(Section::Binary) => {
                for token in line.split_whitespace() {
                    binaries.push(token.to_string());
                }
            }
            Some(Section::End) => break,
            None => {
                return Err(Error::Format(format!(
                    "content before the objective section: '{line}'"
                )))
            }
        }
    }

    // Assemble: declaration order is first appearance (objective, rows,
    // bounds), binaries from their section.
    let mut problem = MilpProblem::new(sense);
    let binary_set: std::collections::HashSet<&str> =
        binaries.iter().map(|s| s.as_str()).collect();
    let mut declared: std::collections::HashSet<String> = std::collections::HashSet::new();
    let mut bound_map: std::collections::HashMap<&str, (f64, f64)> = bounds
        .iter()
        .map(|(n, lo, hi)| (n.as_str(), (*lo, *hi)))
        .collect();
    let mut declare = |problem: &mut MilpProblem,
                       declared: &mut std::collections::HashSet<String>,
                       name: &str|
     -> Result<()> {
        if declared.contains(name) {
            return Ok(());
        }
        declared.insert(name.to_string());
        if binary_set.contains(name) {
            problem.add_binary(name)
        } else {
            let (lo, hi) = bound_map.remove(name).unwrap_or((0.0, f64::INFINITY));
            problem.add_continuous(name, lo, hi)
        }
    };
    for (name, _) in &objective {
        declare(&mut problem, &mut declared, name)?;
    }
    for (_, terms, _, _) in &rows {
        for (name, _) in terms {
            declare(&mut problem, &mut declared, name)?;
        }
    }
    for (name, lo, hi) in &bounds {
        if !declared.contains(name) {
            declared.insert(name.clone());
            if binary_set.contains(name.as_str()) {
                problem.add_binary(name)?;
            } else {
                problem.add_continuous(name, *lo, *hi)?;
            }
        }
    }
    for name in &binaries {
        if !declared.contains(name) {
            declared.insert(name.clone());
            problem.add_binary(name)?;
        }
    }
    for (name, terms, relation, rhs) in rows {
        problem.add_constraint(&name, terms, relation, rhs)?;
    }
    problem.set_objective(objective, sense)?;
    Ok(problem)
}

fn tokenize(body: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let bytes = body.as_bytes();
    let mut at = 0;
    while at < bytes.len() {
        let c = bytes[at] as char;
        if c.is_whitespace() {
            at += 1;
            continue;
        }
        if c == '<' || c == '>' {
            let end = if at + 1 < bytes.len() && bytes[at + 1] as char == '=' {
                at + 2
            } else {
                at + 1
            };
            tokens.push(&body[at..end]);
            at = end;
            continue;
        }
        if c == '=' {
            tokens.push(&body[at..at + 1]);
            at += 1;
            continue;
        }
        if c == '+' || c == '-' {
            // Sign token unless glued to a number.
            let next = bytes.get(at + 1).map(|b| *b as char);
            if next.map_or(true, |n| !(n.is_ascii_digit() || n == '.')) {
                tokens.push(&body[at..at + 1]);
                at += 1;
                continue;
            }
        }
        let start = at;
        while at < bytes.len() {
            let c = bytes[at] as char;
            if c.is_whitespace() || matches!(c, '<' | '>' | '=') {
                break;
            }
            // '+'/'-' inside a token only continue exponents like 1e-5.
            if (c == '+' || c == '-') && at > start {
                let prev = bytes[at - 1] as char;
                if prev != 'e' && prev != 'E' {
                    break;
                }
            }
            at += 1;
        }
        tokens.push(&body[start..at]);
    }
    tokens
}

fn parse_bound_line(line: &str) -> Result<(String, f64, f64)> {
    let token_vec = tokenize(line);
    let t = token_vec.as_slice();
    match t {
        // "name free"
        [name, kw] if kw.eq_ignore_ascii_case("free") => {
            Ok((name.to_string(), f64::NEG_INFINITY, f64::INFINITY))
        }
        // "lo <= name <= hi"
        [lo, "<=", name, "<=", hi] => {
            let lo = parse_number(lo).ok_or_else(|| Error::Format(format!("bad bound '{lo}'")))?;
            let hi = parse_number(hi).ok_or_else(|| Error::Format(format!("bad bound '{hi}'")))?;
            Ok((name.to_string(), lo, hi))
        }
        // "name >= lo"
        [name, ">=", lo] if is_name(name) => {
            let lo = parse_number(lo).ok_or_else(|| Error::Format(format!("bad bound '{lo}'")))?;
            Ok((name.to_string(), lo, f64::INFINITY))
        }
        // "name <= hi"
        [name, "<=", hi] if is_name(name) => {
            let hi = parse_number(hi).ok_or_else(|| Error::Format(format!("bad bound '{hi}'")))?;
            Ok((name.to_string(), f64::NEG_INFINITY, hi))
        }
        // "name = v"
        [name, "=", v] if is_name(name) => {
            let v = parse_number(v).ok_or_else(|| Error::Format(format!("bad bound '{v}'")))?;
            Ok((name.to_string(), v, v))
        }
        _ => Err(Error::Format(format!("unrecognized bounds line '{line}'"))),
    }
}
