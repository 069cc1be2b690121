//! Model dump in the LP text format read by common MIP solvers.

use std::fmt::Write as _;

use super::model::{MipModel, Sense, VarKind};

const LINE_TERMS: usize = 8;

fn write_terms(out: &mut String, model: &MipModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (n, &(j, a)) in terms.iter().enumerate() {
        if n > 0 && n % LINE_TERMS == 0 {
            out.push_str("\n  ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), model.variables[j].name);
    }
}

/// Render the model. Output depends only on the model, so identical
/// instances give identical text.
pub fn write_lp(model: &MipModel) -> String {
    let mut out = String::from("Maximize\n obj:");
    let objective: Vec<(usize, f64)> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(j, v)| (j, v.objective))
        .collect();
    write_terms(&mut out, model, &objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, model, &c.terms);
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {sense} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.upper.is_finite() {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        } else {
            let _ = writeln!(out, " {} >= {}", v.name, v.lower);
        }
    }
    out.push_str("Binaries\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}
