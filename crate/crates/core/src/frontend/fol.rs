//! One-sorted first-order export in TPTP `fof` syntax, with sorts encoded
//! by unary guard predicates.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::algebra::{Sort, Term, Var, VariableSet};
use crate::logic::{Atom, Conjunction, Goal};

const SORT_AXIOMS: &[(&str, &str)] = &[
    ("akey_mesg", "![X]: (akey(X) => mesg(X))"),
    ("skey_mesg", "![X]: (skey(X) => mesg(X))"),
    ("data_mesg", "![X]: (data(X) => mesg(X))"),
    ("strd_disjoint", "![X]: ~(strd(X) & mesg(X))"),
    (
        "pair_sort",
        "![X, Y]: ((mesg(X) & mesg(Y)) => mesg(pair(X, Y)))",
    ),
    (
        "enc_sort",
        "![X, Y]: ((mesg(X) & (akey(Y) | skey(Y))) => mesg(enc(X, Y)))",
    ),
    (
        "invk_akey",
        "![X]: (akey(X) => (akey(invk(X)) & invk(invk(X)) = X))",
    ),
    ("invk_skey", "![X]: (skey(X) => invk(X) = X)"),
];

/// Lower-case identifier fragment: ASCII alphanumerics kept, `'` becomes
/// `_p`, anything else `_x` followed by its code point in hex.
fn sanitize(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            c if c.is_ascii_alphanumeric() || c == '_' => out.push(c),
            '\'' => out.push_str("_p"),
            c => write!(out, "_x{:x}", c as u32).unwrap(),
        }
    }
    out
}

fn guard(sort: Sort) -> &'static str {
    sort.name()
}

/// Maps formula variables to distinct upper-case TPTP variables.
#[derive(Default)]
struct Names {
    assigned: BTreeMap<Var, String>,
    taken: BTreeMap<String, Var>,
}

impl Names {
    fn name(&mut self, v: &Var) -> String {
        if let Some(n) = self.assigned.get(v) {
            return n.clone();
        }
        let s = sanitize(&v.name);
        let mut chars = s.chars();
        let base = match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {
                c.to_ascii_uppercase().to_string() + chars.as_str()
            }
            _ => format!("V{s}"),
        };
        let mut candidate = base.clone();
        let mut n = 1;
        while self.taken.contains_key(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        self.taken.insert(candidate.clone(), v.clone());
        self.assigned.insert(v.clone(), candidate.clone());
        candidate
    }

    fn term(&mut self, t: &Term) -> String {
        match t {
            Term::Var(v) => self.name(v),
            Term::Pair(l, r) => format!("pair({}, {})", self.term(l), self.term(r)),
            Term::Enc(b, k) => format!("enc({}, {})", self.term(b), self.term(k)),
            Term::Invk(k) => format!("invk({})", self.term(k)),
            Term::Nat(n) => n.to_string(),
        }
    }

    fn atom(&mut self, a: &Atom) -> String {
        match a {
            Atom::Progress {
                role,
                height,
                var,
                strand,
                msg,
            } => format!(
                "p_{}_{height}_{}({}, {})",
                sanitize(role),
                sanitize(&var.name),
                self.term(strand),
                self.term(msg)
            ),
            Atom::Prec {
                strand,
                index,
                later_strand,
                later_index,
            } => format!(
                "prec({}, {index}, {}, {later_index})",
                self.term(strand),
                self.term(later_strand)
            ),
            Atom::Non(t) => format!("non({})", self.term(t)),
            Atom::Uniq(t) => format!("uniq({})", self.term(t)),
            Atom::Orig {
                term,
                strand,
                index,
            } => format!("orig({}, {}, {index})", self.term(term), self.term(strand)),
            Atom::Eq(l, r) => format!("{} = {}", self.term(l), self.term(r)),
            Atom::False => "$false".into(),
        }
    }

    fn conjunction(&mut self, c: &Conjunction) -> String {
        match c.atoms.len() {
            0 => "$true".into(),
            _ => {
                let atoms: Vec<String> = c.atoms.iter().map(|a| self.atom(a)).collect();
                format!("({})", atoms.join(" & "))
            }
        }
    }

    /// `binder[vs]: (guards op body)`, or `body` alone with no variables.
    fn quantified(&mut self, binder: char, vars: &VariableSet, op: &str, body: String) -> String {
        if vars.is_empty() {
            return body;
        }
        let names: Vec<String> = vars.iter().map(|v| self.name(&v)).collect();
        let guards: Vec<String> = vars
            .iter()
            .zip(&names)
            .map(|(v, n)| format!("{}({n})", guard(v.sort)))
            .collect();
        format!(
            "{binder}[{}]: (({}) {op} {body})",
            names.join(", "),
            guards.join(" & ")
        )
    }
}

/// The formula of a goal or sentence, without the `fof` wrapper.
pub fn fol_formula(g: &Goal) -> String {
    let mut names = Names::default();
    for v in g.hypothesis.vars.iter() {
        names.name(&v);
    }
    let hypothesis = names.conjunction(&g.hypothesis);
    let conclusion = if g.conclusion.is_empty() {
        "$false".to_string()
    } else {
        let parts: Vec<String> = g
            .conclusion
            .iter()
            .map(|d| {
                let body = names.conjunction(d);
                names.quantified('?', &d.vars, "&", body)
            })
            .collect();
        if parts.len() == 1 {
            parts.into_iter().next().unwrap()
        } else {
            format!("({})", parts.join(" | "))
        }
    };
    let body = format!("({hypothesis} => {conclusion})");
    names.quantified('!', &g.hypothesis.vars, "=>", body)
}

/// The sort axioms followed by `g` as a formula with the given TPTP role,
/// such as `axiom` or `conjecture`.
pub fn print_fol(g: &Goal, role: &str) -> String {
    let mut out = String::new();
    for (name, axiom) in SORT_AXIOMS {
        writeln!(out, "fof({name}, axiom, {axiom}).").unwrap();
    }
    writeln!(
        out,
        "fof({}, {role}, {}).",
        sanitize(&g.protocol),
        fol_formula(g)
    )
    .unwrap();
    out
}
