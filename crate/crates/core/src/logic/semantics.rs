//! Satisfaction of atoms in a skeleton, and finite enumeration of the
//! assignments satisfying a well-moded conjunction.
//!
//! Assignments are substitutions: strand variables map to `Nat` literals,
//! message variables to canonical terms over the skeleton's variables.
//!
//! A conjunction is well-moded when every variable can be grounded:
//! strand positions of `p`, `prec` and `orig` range over the strands,
//! message arguments of `p` are fixed by matching the strand's trace, the
//! arguments of `non`, `uniq` and `orig` range over the skeleton's
//! assumption sets, and an equation grounds one side once the other is
//! ground.

use std::collections::BTreeSet;

use crate::algebra::{match_sequence, match_terms, Substitution, Term, Var};
use crate::skeleton::Skeleton;

use super::{Atom, Conjunction, LogicError};

/// Role substitution witnessing that `strand` is compatible with `role` up
/// to `height`, or `None`.
pub fn progress_binding(
    k: &Skeleton,
    role: &str,
    height: usize,
    strand: usize,
) -> Option<Substitution> {
    progress_binding_with(k, role, height, strand, &Substitution::new())
}

fn progress_binding_with(
    k: &Skeleton,
    role: &str,
    height: usize,
    strand: usize,
    partial: &Substitution,
) -> Option<Substitution> {
    let r = k.protocol().role(role)?;
    if strand >= k.strand_count() || height == 0 || height > r.len() {
        return None;
    }
    let trace = k.trace(strand);
    if height > trace.len() {
        return None;
    }
    let pattern = r.trace().prefix(height);
    let events = trace.prefix(height);
    if pattern.iter().zip(events).any(|(p, e)| p.dir != e.dir) {
        return None;
    }
    match_sequence(
        pattern
            .iter()
            .map(|e| &e.msg)
            .zip(events.iter().map(|e| &e.msg)),
        partial,
    )
}

fn strand_index(t: &Term) -> Option<usize> {
    t.is_ground_nat().and_then(|n| usize::try_from(n).ok())
}

fn node_of(alpha: &Substitution, strand: &Term, index: usize) -> Option<crate::skeleton::Node> {
    strand_index(&alpha.apply(strand)).map(|s| crate::skeleton::Node::new(s, index))
}

/// `k, α ⊨ atom`. Every variable of the atom must be assigned.
pub fn eval_atom(k: &Skeleton, alpha: &Substitution, atom: &Atom) -> Result<bool, LogicError> {
    if let Some(v) = atom.vars().into_iter().find(|v| !alpha.contains(v)) {
        return Err(LogicError::Unassigned(v.name));
    }
    Ok(holds(k, alpha, atom))
}

// Assumes every variable of the atom is assigned.
fn holds(k: &Skeleton, alpha: &Substitution, atom: &Atom) -> bool {
    match atom {
        Atom::Progress {
            role,
            height,
            var,
            strand,
            msg,
        } => {
            let Some(s) = strand_index(&alpha.apply(strand)) else {
                return false;
            };
            let value = alpha.apply(msg);
            if !value.sort().leq(var.sort) {
                return false;
            }
            let mut partial = Substitution::new();
            partial.insert_unchecked(var.clone(), value);
            progress_binding_with(k, role, *height, s, &partial).is_some()
        }
        Atom::Prec {
            strand,
            index,
            later_strand,
            later_index,
        } => match (
            node_of(alpha, strand, *index),
            node_of(alpha, later_strand, *later_index),
        ) {
            (Some(a), Some(b)) => k.precedes(a, b),
            _ => false,
        },
        Atom::Non(t) => k.non_orig().contains(&alpha.apply(t)),
        Atom::Uniq(t) => k.uniq_orig().contains(&alpha.apply(t)),
        Atom::Orig {
            term,
            strand,
            index,
        } => {
            let value = alpha.apply(term);
            k.uniq_orig().contains(&value)
                && node_of(alpha, strand, *index)
                    .map(|n| k.origination_nodes(&value).contains(&n))
                    .unwrap_or(false)
        }
        Atom::Eq(l, r) => alpha.apply(l) == alpha.apply(r),
        Atom::False => false,
    }
}

/// Static mode analysis: every variable of the atoms, other than those
/// already `grounded`, must be groundable.
pub fn mode_check(atoms: &[Atom], grounded: &BTreeSet<Var>) -> Result<(), LogicError> {
    let mut known = grounded.clone();
    for atom in atoms {
        match atom {
            Atom::Progress { strand, msg, .. } => {
                strand.collect_vars(&mut known);
                msg.collect_vars(&mut known);
            }
            Atom::Prec {
                strand,
                later_strand,
                ..
            } => {
                strand.collect_vars(&mut known);
                later_strand.collect_vars(&mut known);
            }
            Atom::Non(t) | Atom::Uniq(t) => t.collect_vars(&mut known),
            Atom::Orig { term, strand, .. } => {
                term.collect_vars(&mut known);
                strand.collect_vars(&mut known);
            }
            Atom::Eq(..) | Atom::False => {}
        }
    }
    loop {
        let mut changed = false;
        for atom in atoms {
            if let Atom::Eq(l, r) = atom {
                let (lv, rv) = (l.vars(), r.vars());
                if lv.is_subset(&known) && !rv.is_subset(&known) {
                    known.extend(rv);
                    changed = true;
                } else if rv.is_subset(&known) && !lv.is_subset(&known) {
                    known.extend(lv);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for atom in atoms {
        if let Some(v) = atom.vars().into_iter().find(|v| !known.contains(v)) {
            return Err(LogicError::Mode(v.name));
        }
    }
    Ok(())
}

/// Every assignment extending `seed` that satisfies all atoms of `c`.
///
/// Declared variables that occur in no atom are left unassigned. Results
/// come in a deterministic search order without duplicates.
pub fn enumerate_assignments(
    k: &Skeleton,
    c: &Conjunction,
    seed: &Substitution,
) -> Result<Vec<Substitution>, LogicError> {
    Search::run(k, &c.atoms, seed, None)
}

/// The first satisfying extension of `seed`, if any.
pub fn first_assignment(
    k: &Skeleton,
    c: &Conjunction,
    seed: &Substitution,
) -> Result<Option<Substitution>, LogicError> {
    Ok(Search::run(k, &c.atoms, seed, Some(1))?.into_iter().next())
}

struct Search<'a> {
    k: &'a Skeleton,
    atoms: &'a [Atom],
    limit: Option<usize>,
    seen: BTreeSet<Substitution>,
    out: Vec<Substitution>,
}

enum Step {
    Extend(Vec<Substitution>),
    Stuck(Var),
}

impl<'a> Search<'a> {
    fn run(
        k: &'a Skeleton,
        atoms: &'a [Atom],
        seed: &Substitution,
        limit: Option<usize>,
    ) -> Result<Vec<Substitution>, LogicError> {
        mode_check(atoms, &seed.domain().cloned().collect())?;
        let mut search = Search {
            k,
            atoms,
            limit,
            seen: BTreeSet::new(),
            out: Vec::new(),
        };
        search.solve((0..atoms.len()).collect(), seed.clone())?;
        Ok(search.out)
    }

    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.out.len() >= l)
    }

    fn solve(&mut self, pending: Vec<usize>, alpha: Substitution) -> Result<(), LogicError> {
        let mut open = Vec::with_capacity(pending.len());
        for i in pending {
            let atom = &self.atoms[i];
            if atom.vars().iter().all(|v| alpha.contains(v)) {
                if !holds(self.k, &alpha, atom) {
                    return Ok(());
                }
            } else {
                open.push(i);
            }
        }
        if open.is_empty() {
            if self.seen.insert(alpha.clone()) {
                self.out.push(alpha);
            }
            return Ok(());
        }
        match self.step(&open, &alpha) {
            Step::Stuck(v) => Err(LogicError::Mode(v.name)),
            Step::Extend(next) => {
                for beta in next {
                    self.solve(open.clone(), beta)?;
                    if self.done() {
                        break;
                    }
                }
                Ok(())
            }
        }
    }

    fn strands(&self, alpha: &Substitution, z: &Var) -> Vec<Substitution> {
        (0..self.k.strand_count())
            .map(|s| {
                let mut beta = alpha.clone();
                beta.insert_unchecked(z.clone(), Term::Nat(s as u64));
                beta
            })
            .collect()
    }

    fn unassigned_var(t: &Term, alpha: &Substitution) -> Option<Var> {
        t.vars().into_iter().find(|v| !alpha.contains(v))
    }

    fn from_set<'t>(
        candidates: impl Iterator<Item = &'t Term>,
        pattern: &Term,
        alpha: &Substitution,
    ) -> Vec<Substitution> {
        candidates
            .flat_map(|e| match_terms(pattern, e, alpha))
            .collect()
    }

    /// Picks the cheapest generator among the open atoms.
    fn step(&self, open: &[usize], alpha: &Substitution) -> Step {
        let ground = |t: &Term| Self::unassigned_var(t, alpha).is_none();

        // Deterministic extensions first.
        for &i in open {
            match &self.atoms[i] {
                Atom::Progress {
                    role,
                    height,
                    var,
                    strand,
                    msg,
                } if ground(strand) => {
                    let Some(s) = strand_index(&alpha.apply(strand)) else {
                        return Step::Extend(Vec::new());
                    };
                    let value = progress_binding(self.k, role, *height, s)
                        .and_then(|sigma| sigma.get(var).cloned());
                    return Step::Extend(match value {
                        Some(v) => match_terms(msg, &v, alpha),
                        None => Vec::new(),
                    });
                }
                Atom::Eq(l, r) if ground(l) => {
                    return Step::Extend(match_terms(r, &alpha.apply(l), alpha));
                }
                Atom::Eq(l, r) if ground(r) => {
                    return Step::Extend(match_terms(l, &alpha.apply(r), alpha));
                }
                _ => {}
            }
        }
        // Finite assumption sets.
        for &i in open {
            match &self.atoms[i] {
                Atom::Non(t) => {
                    return Step::Extend(Self::from_set(self.k.non_orig().iter(), t, alpha))
                }
                Atom::Uniq(t) => {
                    return Step::Extend(Self::from_set(self.k.uniq_orig().iter(), t, alpha))
                }
                Atom::Orig { term, .. } if !ground(term) => {
                    return Step::Extend(Self::from_set(self.k.uniq_orig().iter(), term, alpha))
                }
                _ => {}
            }
        }
        // Branch on a strand variable.
        for &i in open {
            let strand_terms: Vec<&Term> = match &self.atoms[i] {
                Atom::Progress { strand, .. } | Atom::Orig { strand, .. } => vec![strand],
                Atom::Prec {
                    strand,
                    later_strand,
                    ..
                } => vec![strand, later_strand],
                _ => vec![],
            };
            for t in strand_terms {
                if let Some(z) = Self::unassigned_var(t, alpha) {
                    return Step::Extend(self.strands(alpha, &z));
                }
            }
        }
        let stuck = open
            .iter()
            .flat_map(|&i| self.atoms[i].vars())
            .find(|v| !alpha.contains(v))
            .expect("open atoms have unassigned variables");
        Step::Stuck(stuck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Sort;
    use crate::fixtures::blanchet;
    use crate::logic::skeleton_formula;

    fn nat(name: &str) -> Term {
        Term::var(name, Sort::Nat)
    }

    fn init_b(strand: Term, msg: Term) -> Atom {
        Atom::Progress {
            role: "init".into(),
            height: 1,
            var: Var::new("b", Sort::Akey),
            strand,
            msg,
        }
    }

    #[test]
    fn progress_sees_actual_key() {
        let k1 = blanchet::k1();
        let alpha = |key: &str| {
            Substitution::from_pairs([
                (Var::new("z", Sort::Nat), Term::Nat(1)),
                (Var::new("t", Sort::Akey), Term::var(key, Sort::Akey)),
            ])
            .unwrap()
        };
        let atom = init_b(nat("z"), Term::var("t", Sort::Akey));
        assert!(eval_atom(&k1, &alpha("b'"), &atom).unwrap());
        assert!(!eval_atom(&k1, &alpha("b"), &atom).unwrap());
        assert!(!eval_atom(&k1, &alpha("b"), &Atom::False).unwrap());
        assert!(matches!(
            eval_atom(&k1, &Substitution::new(), &atom),
            Err(LogicError::Unassigned(_))
        ));
    }

    #[test]
    fn hypothesis_has_single_assignment_in_k1() {
        let k1 = blanchet::k1();
        let phi0 = skeleton_formula(&blanchet::k0()).formula;
        let found = enumerate_assignments(&k1, &phi0, &Substitution::new()).unwrap();
        assert_eq!(found.len(), 1);
        let expected = Substitution::from_pairs([
            (Var::new("z0", Sort::Nat), Term::Nat(0)),
            (Var::new("a", Sort::Akey), Term::var("a", Sort::Akey)),
            (Var::new("b", Sort::Akey), Term::var("b", Sort::Akey)),
            (Var::new("s", Sort::Skey), Term::var("s", Sort::Skey)),
            (Var::new("d", Sort::Data), Term::var("d", Sort::Data)),
        ])
        .unwrap();
        assert_eq!(found[0], expected);

        let conclusion = Conjunction::new(
            [Var::new("z1", Sort::Nat)].into_iter().collect(),
            vec![init_b(nat("z1"), Term::var("b", Sort::Akey))],
        );
        assert!(enumerate_assignments(&k1, &conclusion, &found[0])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn false_has_no_models() {
        let c = Conjunction::new(Default::default(), vec![Atom::False]);
        assert!(
            enumerate_assignments(&blanchet::k0(), &c, &Substitution::new())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn ungrounded_message_variable_is_a_mode_error() {
        let x = Term::var("x", Sort::Data);
        let c = Conjunction::new(
            [Var::new("x", Sort::Data)].into_iter().collect(),
            vec![Atom::Eq(x.clone(), x)],
        );
        assert!(matches!(
            enumerate_assignments(&blanchet::k0(), &c, &Substitution::new()),
            Err(LogicError::Mode(v)) if v == "x"
        ));
    }

    #[test]
    fn equality_chain_grounds_variables() {
        let k1 = blanchet::k1();
        let y = Term::var("y", Sort::Akey);
        let c = Conjunction::new(
            [
                Var::new("z", Sort::Nat),
                Var::new("y", Sort::Akey),
                Var::new("w", Sort::Akey),
            ]
            .into_iter()
            .collect(),
            vec![
                Atom::Eq(Term::var("w", Sort::Akey), Term::invk(y.clone())),
                init_b(nat("z"), y),
            ],
        );
        let found = enumerate_assignments(&k1, &c, &Substitution::new()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(
            found[0].get(&Var::new("w", Sort::Akey)),
            Some(&Term::invk(Term::var("b'", Sort::Akey)))
        );
    }

    #[test]
    fn non_atoms_range_over_assumptions() {
        let k1 = blanchet::k1();
        let c = Conjunction::new(
            [Var::new("k", Sort::Akey)].into_iter().collect(),
            vec![Atom::Non(Term::invk(Term::var("k", Sort::Akey)))],
        );
        let found = enumerate_assignments(&k1, &c, &Substitution::new()).unwrap();
        let keys: Vec<Term> = found
            .iter()
            .map(|a| a.get(&Var::new("k", Sort::Akey)).unwrap().clone())
            .collect();
        assert_eq!(
            keys,
            vec![Term::var("a", Sort::Akey), Term::var("b", Sort::Akey)]
        );
    }
}
