//! From a hypothesis back to a skeleton whose formula it is.

use std::collections::BTreeSet;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::algebra::{Sort, Substitution, Term, Var, VariableSet};
use crate::skeleton::{Instance, Node, Protocol, Skeleton};

use super::semantics::mode_check;
use super::{Atom, Conjunction, LogicError};

struct StrandSpec {
    role: String,
    height: usize,
    subst: Substitution,
}

fn strand_var(t: &Term) -> Result<Var, LogicError> {
    t.as_var()
        .filter(|v| v.sort == Sort::Nat)
        .cloned()
        .ok_or_else(|| LogicError::Unsupported(format!("strand argument {t} is not a variable")))
}

/// One strand per strand variable, in order of first occurrence in a
/// `p` atom. Role variables not mentioned by the hypothesis are bound to
/// fresh skeleton variables. Intra-strand `prec` atoms that strand
/// succession already implies are dropped.
pub fn characteristic_skeleton(
    vars: &VariableSet,
    phi0: &Conjunction,
    protocol: Arc<Protocol>,
) -> Result<Skeleton, LogicError> {
    mode_check(&phi0.atoms, &BTreeSet::new())?;
    for atom in &phi0.atoms {
        atom.check(&protocol)?;
        for v in atom.vars() {
            if !vars.contains(&v) {
                return Err(LogicError::UnboundVar(v.name));
            }
        }
    }

    let mut strands: IndexMap<Var, StrandSpec> = IndexMap::new();
    for atom in &phi0.atoms {
        let Atom::Progress {
            role,
            height,
            var,
            strand,
            msg,
        } = atom
        else {
            continue;
        };
        let z = strand_var(strand)?;
        let spec = strands.entry(z.clone()).or_insert_with(|| StrandSpec {
            role: role.clone(),
            height: 0,
            subst: Substitution::new(),
        });
        if spec.role != *role {
            return Err(LogicError::RoleConflict {
                var: z.name,
                first: spec.role.clone(),
                second: role.clone(),
            });
        }
        spec.height = spec.height.max(*height);
        if spec.subst.bind(var.clone(), msg.clone()).is_err() {
            return Err(LogicError::BindingConflict(z.name));
        }
    }
    let index_of = |t: &Term| -> Result<usize, LogicError> {
        let z = strand_var(t)?;
        strands
            .get_index_of(&z)
            .ok_or_else(|| LogicError::Unsupported(format!("strand {} has no p atom", z.name)))
    };

    let mut skel_vars: VariableSet = vars.iter().filter(|v| v.sort != Sort::Nat).collect();
    let mut instances = Vec::new();
    for spec in strands.values() {
        let role = protocol.role(&spec.role).expect("checked above").clone();
        let mut subst = spec.subst.clone();
        for x in role.prefix_vars(spec.height) {
            if subst.contains(&x) {
                continue;
            }
            let mut name = x.name.clone();
            let mut n = 1;
            while skel_vars.contains_name(&name) || vars.contains_name(&name) {
                name = format!("{}_{n}", x.name);
                n += 1;
            }
            let fresh = skel_vars.declare(name, x.sort)?;
            subst.bind(x, Term::Var(fresh))?;
        }
        instances.push(Instance::new(role, spec.height, subst)?);
    }

    let mut orderings = Vec::new();
    let (mut non, mut uniq, mut origs) = (Vec::new(), Vec::new(), Vec::new());
    for atom in &phi0.atoms {
        match atom {
            Atom::Progress { .. } => {}
            Atom::Prec {
                strand,
                index,
                later_strand,
                later_index,
            } => {
                let a = Node::new(index_of(strand)?, *index);
                let b = Node::new(index_of(later_strand)?, *later_index);
                for n in [a, b] {
                    if n.index >= instances[n.strand].height {
                        return Err(LogicError::IllFormed(format!(
                            "{atom} refers to node {n} beyond the strand's height"
                        )));
                    }
                }
                if a.strand != b.strand {
                    orderings.push((a, b));
                } else if a.index >= b.index {
                    return Err(LogicError::IllFormed(format!(
                        "{atom} contradicts strand succession"
                    )));
                }
            }
            Atom::Non(t) => non.push(t.clone()),
            Atom::Uniq(t) => uniq.push(t.clone()),
            Atom::Orig {
                term,
                strand,
                index,
            } => origs.push((term.clone(), Node::new(index_of(strand)?, *index))),
            Atom::Eq(..) => {
                return Err(LogicError::Unsupported(format!("equation {atom}")));
            }
            Atom::False => return Err(LogicError::Unsupported("false".into())),
        }
    }

    let k = Skeleton::new(protocol, skel_vars, instances, orderings, non, uniq)?;
    let report = k.check_wellformed();
    if let Some(v) = report.violations.first() {
        return Err(LogicError::IllFormed(v.to_string()));
    }
    for (t, n) in origs {
        if !k.uniq_orig().contains(&t) || !k.origination_nodes(&t).contains(&n) {
            return Err(LogicError::OrigInconsistent(format!(
                "{t} does not uniquely originate at node {n}"
            )));
        }
    }
    Ok(k)
}
