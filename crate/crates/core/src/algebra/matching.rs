//! Matching modulo the key-inverse equations.
//!
//! Patterns and targets are canonical. A canonical pattern of the form
//! `(invk v)` always has `v` of sort akey, and it matches a target `t` of
//! sort akey exactly when `v` matches the canonical inverse of `t`. With
//! that rule, matching over canonical terms is syntactic and unitary, so the
//! returned set never holds more than one substitution.

use super::{Substitution, Term};

/// All extensions of `partial` that map `pattern` onto `target`.
pub fn match_terms(pattern: &Term, target: &Term, partial: &Substitution) -> Vec<Substitution> {
    let mut sigma = partial.clone();
    if match_into(pattern, target, &mut sigma) {
        vec![sigma]
    } else {
        Vec::new()
    }
}

/// Matches event-by-event over two equally long sequences.
pub fn match_sequence<'a, I>(pairs: I, partial: &Substitution) -> Option<Substitution>
where
    I: IntoIterator<Item = (&'a Term, &'a Term)>,
{
    let mut sigma = partial.clone();
    for (p, t) in pairs {
        if !match_into(p, t, &mut sigma) {
            return None;
        }
    }
    Some(sigma)
}

/// Extends `sigma` in place; on failure `sigma` may hold partial bindings.
pub(crate) fn match_into(pattern: &Term, target: &Term, sigma: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => {
            if let Some(bound) = sigma.get(v) {
                return bound == target;
            }
            if !target.sort().leq(v.sort) {
                return false;
            }
            sigma.insert_unchecked(v.clone(), target.clone());
            true
        }
        Term::Nat(n) => matches!(target, Term::Nat(m) if m == n),
        Term::Pair(pl, pr) => match target {
            Term::Pair(tl, tr) => match_into(pl, tl, sigma) && match_into(pr, tr, sigma),
            _ => false,
        },
        Term::Enc(pb, pk) => match target {
            Term::Enc(tb, tk) => match_into(pb, tb, sigma) && match_into(pk, tk, sigma),
            _ => false,
        },
        Term::Invk(p) => {
            let ts = target.sort();
            if !ts.is_key() || ts != p.sort() {
                return false;
            }
            match_into(p, &Term::inverse(target.clone()), sigma)
        }
    }
}
