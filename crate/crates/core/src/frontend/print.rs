//! Printers producing the surface syntax read by [`super::parse`].

use std::fmt::Write;

use crate::algebra::VariableSet;
use crate::logic::{Conjunction, Goal, ShapeAnalysis};
use crate::skeleton::{Protocol, Skeleton};

use super::parse::Formula;

fn decls(vars: &VariableSet) -> String {
    vars.iter()
        .map(|v| format!("({} {})", v.name, v.sort))
        .collect::<Vec<_>>()
        .join(" ")
}

fn vars_clause(vars: &VariableSet) -> String {
    if vars.is_empty() {
        "(vars)".into()
    } else {
        format!("(vars {})", decls(vars))
    }
}

pub fn print_protocol(p: &Protocol) -> String {
    let mut out = format!("(defprotocol {}", p.name);
    for r in p.roles() {
        write!(
            out,
            "\n  (defrole {}\n    {}\n    (trace",
            r.name,
            vars_clause(&r.vars)
        )
        .unwrap();
        for e in r.trace().events() {
            write!(out, "\n      ({} {})", e.dir.keyword(), e.msg).unwrap();
        }
        out.push_str("))");
    }
    out.push(')');
    out
}

/// Clauses of a skeleton after the protocol name, one per line.
fn skeleton_clauses(k: &Skeleton) -> Vec<String> {
    let mut out = vec![vars_clause(k.vars())];
    for inst in k.instances() {
        let mut line = format!("(defstrand {} {}", inst.role.name, inst.height);
        for x in inst.role.prefix_vars(inst.height) {
            if let Some(t) = inst.subst.get(&x) {
                write!(line, " ({} {t})", x.name).unwrap();
            }
        }
        line.push(')');
        out.push(line);
    }
    if !k.orderings().is_empty() {
        let pairs: Vec<String> = k
            .orderings()
            .iter()
            .map(|(a, b)| format!("({a} {b})"))
            .collect();
        out.push(format!("(precedes {})", pairs.join(" ")));
    }
    for (keyword, set) in [("non-orig", k.non_orig()), ("uniq-orig", k.uniq_orig())] {
        if !set.is_empty() {
            let ts: Vec<String> = set.iter().map(ToString::to_string).collect();
            out.push(format!("({keyword} {})", ts.join(" ")));
        }
    }
    out
}

fn indented(head: &str, clauses: &[String], indent: usize) -> String {
    let pad = " ".repeat(indent);
    let mut out = head.to_string();
    for c in clauses {
        write!(out, "\n{pad}{c}").unwrap();
    }
    out.push(')');
    out
}

pub fn print_skeleton(k: &Skeleton) -> String {
    indented(
        &format!("(defskeleton {}", k.protocol().name),
        &skeleton_clauses(k),
        2,
    )
}

pub fn print_analysis(sa: &ShapeAnalysis) -> String {
    let pov = sa.pov();
    let mut out = String::from("(defanalysis\n  ");
    out.push_str(&indented(
        &format!("(pov {}", pov.protocol().name),
        &skeleton_clauses(pov),
        4,
    ));
    for delta in sa.shapes() {
        let k = delta.target();
        let mut clauses = skeleton_clauses(k);
        let map: Vec<String> = delta.strand_map().iter().map(ToString::to_string).collect();
        let subst: Vec<String> = pov
            .vars()
            .iter()
            .filter_map(|x| delta.subst().get(&x).map(|t| format!("({} {t})", x.name)))
            .collect();
        clauses.push(format!("(maps ({}) ({}))", map.join(" "), subst.join(" ")));
        out.push_str("\n  ");
        out.push_str(&indented(
            &format!("(shape {}", k.protocol().name),
            &clauses,
            4,
        ));
    }
    out.push(')');
    out
}

fn conjunction(c: &Conjunction, indent: usize) -> String {
    if c.atoms.is_empty() {
        return "(and)".into();
    }
    let atoms: Vec<String> = c.atoms.iter().map(ToString::to_string).collect();
    indented("(and", &atoms, indent)
}

/// Goals and shape analysis sentences.
pub fn print_goal(g: &Goal) -> String {
    let mut out = format!(
        "(defgoal {}\n  (forall ({})\n    (implies\n      {}",
        g.protocol,
        decls(&g.hypothesis.vars),
        conjunction(&g.hypothesis, 8)
    );
    if g.conclusion.is_empty() {
        out.push_str("\n      (false))))");
        return out;
    }
    out.push_str("\n      (or");
    for d in &g.conclusion {
        write!(
            out,
            "\n        (exists ({})\n          {})",
            decls(&d.vars),
            conjunction(d, 12)
        )
        .unwrap();
    }
    out.push_str("))))");
    out
}

pub fn print_formula(f: &Formula) -> String {
    format!(
        "(defformula {} ({})\n  {})",
        f.protocol,
        decls(&f.conjunction.vars),
        conjunction(&f.conjunction, 4)
    )
}
