//! CPLEX LP text format: writer and a reader for the subset the writer emits
//! (objective, constraints, bounds, binaries).

use std::fmt::Write;
use std::fs;
use std::path::Path;

use super::model::{Constraint, MilpModel, Sense, VarKind};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (n, &(v, c)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { '-' } else { '+' };
        write!(out, " {sign} {} {}", c.abs(), model.variables[v].name).unwrap();
    }
}

/// Renders the model. Output is deterministic for a given model.
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    writeln!(out, "\\ Problem: {}", model.name).unwrap();
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, &model.objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        write!(out, " {}:", c.name).unwrap();
        write_terms(&mut out, model, &c.terms);
        writeln!(out, " {} {}", c.sense.symbol(), c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            continue;
        }
        match v.upper {
            Some(u) => writeln!(out, " {} <= {} <= {}", v.lower, v.name, u).unwrap(),
            None if v.lower != 0.0 => writeln!(out, " {} >= {}", v.name, v.lower).unwrap(),
            None => {}
        }
    }
    out.push_str("Binaries\n");
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    for chunk in binaries.chunks(TERMS_PER_LINE) {
        writeln!(out, " {}", chunk.join(" ")).unwrap();
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_lp(model)).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Done,
}

fn section_header(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::Done),
        _ => None,
    }
}

fn parse_number(token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a number, found `{token}`")))
}

fn parse_sense(token: &str) -> Option<Sense> {
    match token {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

/// Parses `[+|-] [coef] name ...` into terms, declaring variables on the fly.
fn parse_terms(model: &mut MilpModel, tokens: &[&str]) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            _ => {
                if let Ok(c) = tok.parse::<f64>() {
                    coef = Some(c);
                } else {
                    let v = model.add_variable(tok.to_string(), VarKind::Continuous, 0.0, None);
                    terms.push((v, sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    Ok(terms)
}

/// Splits a section body into `name: body` statements.
fn statements(tokens: &[String]) -> Vec<(String, Vec<&str>)> {
    let mut out: Vec<(String, Vec<&str>)> = Vec::new();
    for tok in tokens {
        if let Some(name) = tok.strip_suffix(':') {
            out.push((name.to_string(), Vec::new()));
        } else if let Some(last) = out.last_mut() {
            last.1.push(tok);
        } else {
            out.push((String::new(), vec![tok]));
        }
    }
    out
}

/// Reads an LP document back into a model.
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut model = MilpModel::new("");
    let mut section = Section::Preamble;
    let mut objective_tokens: Vec<String> = Vec::new();
    let mut constraint_tokens: Vec<String> = Vec::new();
    let mut bound_lines: Vec<String> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for raw in text.lines() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix("\\ Problem:") {
            model.name = name.trim().to_string();
            continue;
        }
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        if let Some(s) = section_header(line) {
            section = s;
            continue;
        }
        // Attach `name:` to its own token even when written `name:x`.
        let spaced = line.replacen(':', ": ", 1);
        let tokens = spaced.split_whitespace().map(str::to_string);
        match section {
            Section::Objective => objective_tokens.extend(tokens),
            Section::Constraints => constraint_tokens.extend(tokens),
            Section::Bounds => bound_lines.push(line.to_string()),
            Section::Binaries => binaries.extend(tokens),
            Section::Preamble | Section::Done => return Err(Error::Parse(format!("unexpected line `{line}`"))),
        }
    }

    for (_, body) in statements(&objective_tokens) {
        let terms = parse_terms(&mut model, &body)?;
        model.objective.extend(terms);
    }
    for (name, body) in statements(&constraint_tokens) {
        let split = body
            .iter()
            .position(|t| parse_sense(t).is_some())
            .ok_or_else(|| Error::Parse(format!("constraint `{name}` has no comparison")))?;
        if split + 2 != body.len() {
            return Err(Error::Parse(format!("constraint `{name}` must end with `<op> <rhs>`")));
        }
        let terms = parse_terms(&mut model, &body[..split])?;
        model.constraints.push(Constraint {
            name,
            terms,
            sense: parse_sense(body[split]).expect("checked"),
            rhs: parse_number(body[split + 1])?,
        });
    }
    for line in &bound_lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [lo, "<=", name, "<=", hi] => {
                let v = model.add_variable(name.to_string(), VarKind::Continuous, 0.0, None);
                let var = model.variable_mut(v);
                var.lower = parse_number(lo)?;
                var.upper = Some(parse_number(hi)?);
            }
            [name, ">=", lo] => {
                let v = model.add_variable(name.to_string(), VarKind::Continuous, 0.0, None);
                model.variable_mut(v).lower = parse_number(lo)?;
            }
            [name, "<=", hi] => {
                let v = model.add_variable(name.to_string(), VarKind::Continuous, 0.0, None);
                model.variable_mut(v).upper = Some(parse_number(hi)?);
            }
            _ => return Err(Error::Parse(format!("unsupported bound `{line}`"))),
        }
    }
    for name in binaries {
        let v = model.add_variable(name, VarKind::Binary, 0.0, None);
        let var = model.variable_mut(v);
        var.kind = VarKind::Binary;
        var.upper = None;
    }
    Ok(model)
}
