use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{Sort, Substitution, Term, Var, VariableSet};
use crate::skeleton::Protocol;

use super::LogicError;

/// Atomic formulas of the goal language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `P[role, height, var](strand, msg)`: the strand is compatible with
    /// the role up to `height`, binding the role variable to `msg`.
    Progress {
        role: String,
        height: usize,
        var: Var,
        strand: Term,
        msg: Term,
    },
    Prec {
        strand: Term,
        index: usize,
        later_strand: Term,
        later_index: usize,
    },
    Non(Term),
    Uniq(Term),
    Orig {
        term: Term,
        strand: Term,
        index: usize,
    },
    Eq(Term, Term),
    False,
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Progress { strand, msg, .. } => vec![strand, msg],
            Atom::Prec {
                strand,
                later_strand,
                ..
            } => vec![strand, later_strand],
            Atom::Non(t) | Atom::Uniq(t) => vec![t],
            Atom::Orig { term, strand, .. } => vec![term, strand],
            Atom::Eq(l, r) => vec![l, r],
            Atom::False => vec![],
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.collect_vars(&mut out);
        }
        out
    }

    /// Applies `sigma` to every term argument.
    pub fn substitute(&self, sigma: &Substitution) -> Atom {
        match self {
            Atom::Progress {
                role,
                height,
                var,
                strand,
                msg,
            } => Atom::Progress {
                role: role.clone(),
                height: *height,
                var: var.clone(),
                strand: sigma.apply(strand),
                msg: sigma.apply(msg),
            },
            Atom::Prec {
                strand,
                index,
                later_strand,
                later_index,
            } => Atom::Prec {
                strand: sigma.apply(strand),
                index: *index,
                later_strand: sigma.apply(later_strand),
                later_index: *later_index,
            },
            Atom::Non(t) => Atom::Non(sigma.apply(t)),
            Atom::Uniq(t) => Atom::Uniq(sigma.apply(t)),
            Atom::Orig {
                term,
                strand,
                index,
            } => Atom::Orig {
                term: sigma.apply(term),
                strand: sigma.apply(strand),
                index: *index,
            },
            Atom::Eq(l, r) => Atom::Eq(sigma.apply(l), sigma.apply(r)),
            Atom::False => Atom::False,
        }
    }

    /// Sort and arity checks against the protocol's roles.
    pub fn check(&self, protocol: &Protocol) -> Result<(), LogicError> {
        let strand_arg = |t: &Term| -> Result<(), LogicError> {
            if t.check_sort()? != Sort::Nat {
                return Err(LogicError::BadAtom(format!(
                    "strand argument {t} must have sort strd"
                )));
            }
            Ok(())
        };
        let atomic_arg = |t: &Term| -> Result<(), LogicError> {
            let s = t.check_sort()?;
            if !s.is_atomic() {
                return Err(LogicError::BadAtom(format!(
                    "{t} has sort {s}, expected an atom sort"
                )));
            }
            Ok(())
        };
        match self {
            Atom::Progress {
                role,
                height,
                var,
                strand,
                msg,
            } => {
                let r = protocol.role(role).ok_or_else(|| LogicError::UnknownRole {
                    protocol: protocol.name.clone(),
                    role: role.clone(),
                })?;
                if *height == 0 || *height > r.len() {
                    return Err(LogicError::BadAtom(format!(
                        "height {height} out of range for role {role} of length {}",
                        r.len()
                    )));
                }
                if !r.prefix_vars(*height).contains(var) {
                    return Err(LogicError::BadAtom(format!(
                        "{} does not occur in the first {height} events of role {role}",
                        var.name
                    )));
                }
                strand_arg(strand)?;
                let ms = msg.check_sort()?;
                if !ms.leq(var.sort) {
                    return Err(LogicError::BadAtom(format!(
                        "{msg} of sort {ms} cannot be bound to role variable {} of sort {}",
                        var.name, var.sort
                    )));
                }
                Ok(())
            }
            Atom::Prec {
                strand,
                later_strand,
                ..
            } => {
                strand_arg(strand)?;
                strand_arg(later_strand)
            }
            Atom::Non(t) | Atom::Uniq(t) => atomic_arg(t),
            Atom::Orig { term, strand, .. } => {
                atomic_arg(term)?;
                strand_arg(strand)
            }
            Atom::Eq(l, r) => {
                let (ls, rs) = (l.check_sort()?, r.check_sort()?);
                if ls.leq(rs) || rs.leq(ls) {
                    Ok(())
                } else {
                    Err(LogicError::BadAtom(format!(
                        "cannot equate {l} of sort {ls} with {r} of sort {rs}"
                    )))
                }
            }
            Atom::False => Ok(()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Progress {
                role,
                height,
                var,
                strand,
                msg,
            } => write!(f, "(p {role} {height} {} {strand} {msg})", var.name),
            Atom::Prec {
                strand,
                index,
                later_strand,
                later_index,
            } => write!(f, "(prec {strand} {index} {later_strand} {later_index})"),
            Atom::Non(t) => write!(f, "(non {t})"),
            Atom::Uniq(t) => write!(f, "(uniq {t})"),
            Atom::Orig {
                term,
                strand,
                index,
            } => write!(f, "(orig {term} {strand} {index})"),
            Atom::Eq(l, r) => write!(f, "(= {l} {r})"),
            Atom::False => f.write_str("(false)"),
        }
    }
}

/// A conjunction of atoms together with the variables it quantifies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Conjunction {
    pub vars: VariableSet,
    pub atoms: Vec<Atom>,
}

impl Conjunction {
    pub fn new(vars: VariableSet, atoms: Vec<Atom>) -> Conjunction {
        Conjunction { vars, atoms }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(Atom::vars).collect()
    }
}

/// `∀X (Φ₀ ⊃ ⋁ᵢ ∃Yᵢ Φᵢ)`. An empty conclusion is `false`, which makes the
/// goal a secrecy goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub protocol: String,
    /// `vars` of the hypothesis are the universally quantified variables.
    pub hypothesis: Conjunction,
    /// `vars` of each disjunct are its existentially quantified variables.
    pub conclusion: Vec<Conjunction>,
}

/// Shape analysis sentences share the goal syntax; their disjunct bodies
/// are the homomorphism equalities followed by the shape's formula.
pub type Sentence = Goal;

impl Goal {
    /// Atom checks plus variable scoping.
    pub fn check(&self, protocol: &Protocol) -> Result<(), LogicError> {
        if protocol.name != self.protocol {
            return Err(LogicError::ProtocolMismatch {
                expected: protocol.name.clone(),
                found: self.protocol.clone(),
            });
        }
        let universal = &self.hypothesis.vars;
        for atom in &self.hypothesis.atoms {
            atom.check(protocol)?;
            for v in atom.vars() {
                if !universal.contains(&v) {
                    return Err(LogicError::UnboundVar(v.name));
                }
            }
        }
        for disjunct in &self.conclusion {
            for v in disjunct.vars.iter() {
                if universal.contains_name(&v.name) {
                    return Err(LogicError::BadAtom(format!(
                        "existential {} shadows a universal variable",
                        v.name
                    )));
                }
            }
            for atom in &disjunct.atoms {
                atom.check(protocol)?;
                for v in atom.vars() {
                    if !universal.contains(&v) && !disjunct.vars.contains(&v) {
                        return Err(LogicError::UnboundVar(v.name));
                    }
                }
            }
        }
        Ok(())
    }
}
