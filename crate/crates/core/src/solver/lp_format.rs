use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::milp::{LinExpr, MilpModel, MilpSolution, SolveStatus, VarKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImportError {
    #[error("line {line}: unknown variable name {name:?}")]
    UnknownVariableName { line: usize, name: String },
    #[error("line {line}: expected `name value`, found {text:?}")]
    MalformedLine { line: usize, text: String },
}

/// Map a debug label onto `[A-Za-z0-9_]`, never starting with a digit.
pub fn sanitize_name(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert_str(0, "v_");
    }
    s
}

/// Unique sanitized names, disambiguated by position where labels collide.
fn unique_names<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    labels
        .enumerate()
        .map(|(k, l)| {
            let mut name = sanitize_name(l);
            if !seen.insert(name.clone()) {
                name = format!("{name}_{k}");
                seen.insert(name.clone());
            }
            name
        })
        .collect()
}

pub(crate) fn variable_names(model: &MilpModel) -> Vec<String> {
    unique_names(model.variables.iter().map(|v| v.name.as_str()))
}

fn write_expr(out: &mut String, e: &LinExpr, names: &[String], indent: &str) {
    let mut first = true;
    let mut on_line = 0;
    for (v, c) in e.terms() {
        if on_line == 8 {
            out.push('\n');
            out.push_str(indent);
            on_line = 0;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if first {
            if c < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let _ = write!(out, "{} {}", c.abs(), names[v.0]);
        first = false;
        on_line += 1;
    }
    let k = e.constant_part();
    if k != 0.0 || first {
        if first {
            let _ = write!(out, "{k}");
        } else {
            let _ = write!(out, " {} {}", if k < 0.0 { "-" } else { "+" }, k.abs());
        }
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{}", v + 0.0)
    }
}

/// CPLEX LP text for `model`, ordered by variable and constraint id.
pub fn export_lp(model: &MilpModel) -> String {
    let names = variable_names(model);
    let row_names = unique_names(model.constraints.iter().map(|c| c.tag.as_str()));
    let mut out = String::new();
    out.push_str("Maximize\n obj: ");
    write_expr(&mut out, &model.objective, &names, "  ");
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&row_names) {
        let _ = write!(out, " {name}: ");
        write_expr(&mut out, &c.expr, &names, "  ");
        let _ = writeln!(out, " {} {}", c.sense, c.rhs + 0.0);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        let default_binary = v.kind == VarKind::Binary && v.lo == 0.0 && v.hi == 1.0;
        if default_binary {
            continue;
        }
        if v.lo == v.hi {
            let _ = writeln!(out, " {name} = {}", v.lo + 0.0);
        } else if v.lo == f64::NEG_INFINITY && v.hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", bound(v.lo), bound(v.hi));
        }
    }
    let bins: Vec<&str> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

/// `name value` lines for every variable, in id order.
pub fn write_solution(model: &MilpModel, sol: &MilpSolution) -> String {
    let names = variable_names(model);
    let mut out = format!("# objective {}\n", sol.objective);
    for (name, v) in names.iter().zip(&sol.values) {
        let _ = writeln!(out, "{name} {v}");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedSolution {
    pub solution: MilpSolution,
    /// Variables absent from the file (set to 0).
    pub missing: Vec<String>,
    /// Constraints the imported assignment violates beyond 1e-7.
    pub violations: Vec<String>,
}

/// Read an external solver's `name value` solution. The objective is
/// recomputed from the assignment.
pub fn import_solution(model: &MilpModel, text: &str) -> Result<ImportedSolution, ImportError> {
    let names = variable_names(model);
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
    let mut values = vec![0.0; model.num_vars()];
    let mut seen = vec![false; model.num_vars()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ImportError::MalformedLine {
                line: lineno + 1,
                text: raw.to_string(),
            });
        };
        let value: f64 = value.parse().map_err(|_| ImportError::MalformedLine {
            line: lineno + 1,
            text: raw.to_string(),
        })?;
        let &k = index.get(name).ok_or_else(|| ImportError::UnknownVariableName {
            line: lineno + 1,
            name: name.to_string(),
        })?;
        values[k] = value;
        seen[k] = true;
    }
    for (k, var) in model.variables.iter().enumerate() {
        if var.kind == VarKind::Binary && (values[k] - values[k].round()).abs() <= 1e-6 {
            values[k] = values[k].round();
        }
    }
    let missing: Vec<String> = (0..model.num_vars()).filter(|&k| !seen[k]).map(|k| names[k].clone()).collect();
    for m in &missing {
        log::warn!("variable {m} missing from solution file; using 0");
    }
    let violations = model.violations(&values, 1e-7);
    let objective = model.objective.eval(&values);
    Ok(ImportedSolution {
        solution: MilpSolution {
            status: SolveStatus::Feasible,
            values,
            objective,
        },
        missing,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    #[test]
    fn sanitizes() {
        assert_eq!(sanitize_name("theta[F G R,3]"), "theta_F_G_R_3_");
        assert_eq!(sanitize_name("3x"), "v_3x");
        assert_eq!(sanitize_name(""), "v_");
    }

    #[test]
    fn collisions_get_suffixes() {
        let names = unique_names(["a b", "a_b", "c"].into_iter());
        assert_eq!(names, vec!["a_b", "a_b_1", "c"]);
    }

    #[test]
    fn one_variable_model() {
        let mut m = MilpModel::new(10.0);
        let x = m.add_continuous("x", 0.0, 3.0);
        m.constrain(LinExpr::term(x, 2.0), Sense::Le, 5.0, "cap");
        m.objective = x.into();
        let text = export_lp(&m);
        assert_eq!(
            text,
            "Maximize\n obj: 1 x\nSubject To\n cap: 2 x <= 5\nBounds\n 0 <= x <= 3\nEnd\n"
        );
        assert_eq!(export_lp(&m.clone()), text);
    }

    #[test]
    fn import_errors() {
        let mut m = MilpModel::new(10.0);
        let x = m.add_continuous("x", 0.0, 3.0);
        m.objective = LinExpr::term(x, 2.0);
        let ok = import_solution(&m, "# comment\nx 1.5\n").unwrap();
        assert_eq!(ok.solution.objective, 3.0);
        assert_eq!(ok.solution.status, SolveStatus::Feasible);
        assert!(ok.missing.is_empty());
        assert!(matches!(
            import_solution(&m, "y 1"),
            Err(ImportError::UnknownVariableName { line: 1, .. })
        ));
        assert!(matches!(
            import_solution(&m, "x\n"),
            Err(ImportError::MalformedLine { line: 1, .. })
        ));
        let missing = import_solution(&m, "").unwrap();
        assert_eq!(missing.missing, vec!["x".to_string()]);
    }
}
