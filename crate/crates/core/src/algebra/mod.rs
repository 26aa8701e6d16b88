//! The order-sorted message algebra: sorted terms over pairing, encryption
//! and key inverse, their canonical forms, substitutions, and matching.
//!
//! Canonical forms cancel `(invk (invk a))` to `a` for asymmetric keys and
//! `(invk s)` to `s` for symmetric keys. Every value handed out by this
//! module is canonical, so term equality is syntactic.

mod matching;
mod subst;
mod term;

use thiserror::Error;

pub use matching::{match_sequence, match_terms};
pub use subst::Substitution;
pub use term::{Sort, Term, Var, VariableSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("sort error: {0}")]
    Sort(String),
    #[error("variable {name} declared as {first} and as {second}")]
    Redeclared {
        name: String,
        first: Sort,
        second: Sort,
    },
    #[error("variable {var} bound to both {old} and {new}")]
    Conflict {
        var: String,
        old: String,
        new: String,
    },
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn atom_strategy() -> impl Strategy<Value = Term> {
        prop_oneof![
            Just(Term::var("a", Sort::Akey)),
            Just(Term::var("b", Sort::Akey)),
            Just(Term::var("s", Sort::Skey)),
            Just(Term::var("d", Sort::Data)),
            Just(Term::var("x", Sort::Top)),
        ]
    }

    fn key_strategy() -> impl Strategy<Value = Term> {
        let base = prop_oneof![
            Just(Term::var("a", Sort::Akey)),
            Just(Term::var("b", Sort::Akey)),
            Just(Term::var("s", Sort::Skey)),
        ];
        // Raw, possibly non-canonical, inverse towers.
        (base, 0usize..4).prop_map(|(k, n)| (0..n).fold(k, |acc, _| Term::invk(acc)))
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![atom_strategy(), key_strategy()];
        leaf.prop_recursive(3, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::pair(l, r)),
                (inner, key_strategy()).prop_map(|(b, k)| Term::enc(b, k)),
            ]
        })
    }

    fn subst_strategy() -> impl Strategy<Value = Substitution> {
        (
            proptest::option::of(key_strategy()),
            proptest::option::of(term_strategy()),
            proptest::option::of(Just(Term::var("e", Sort::Data))),
        )
            .prop_map(|(ka, tx, dd)| {
                let mut s = Substitution::new();
                if let Some(k) = ka.filter(|k| k.sort() == Sort::Akey) {
                    s.bind(Var::new("a", Sort::Akey), k).unwrap();
                }
                if let Some(t) = tx {
                    s.bind(Var::new("x", Sort::Top), t).unwrap();
                }
                if let Some(d) = dd {
                    s.bind(Var::new("d", Sort::Data), d).unwrap();
                }
                s
            })
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(t in term_strategy()) {
            let c = t.canonicalize().unwrap();
            prop_assert!(c.is_canonical());
            prop_assert_eq!(c.canonicalize().unwrap(), c);
        }

        #[test]
        fn apply_preserves_canonicity_and_sorts(t in term_strategy(), s in subst_strategy()) {
            let c = t.canonicalize().unwrap();
            let out = s.apply(&c);
            prop_assert!(out.is_canonical());
            if c.as_var().is_some() {
                prop_assert!(out.sort().leq(c.sort()));
            } else {
                prop_assert_eq!(out.sort(), c.sort());
            }
        }

        #[test]
        fn compose_is_associative(
            t in term_strategy(),
            s1 in subst_strategy(),
            s2 in subst_strategy(),
            s3 in subst_strategy(),
        ) {
            let c = t.canonicalize().unwrap();
            let left = s3.compose(&s2.compose(&s1));
            let right = s3.compose(&s2).compose(&s1);
            prop_assert_eq!(left.apply(&c), right.apply(&c));
            prop_assert_eq!(left.apply(&c), s3.apply(&s2.apply(&s1.apply(&c))));
        }

        #[test]
        fn match_is_sound_and_unitary(p in term_strategy(), s in subst_strategy()) {
            let p = p.canonicalize().unwrap();
            let target = s.apply(&p);
            let found = match_terms(&p, &target, &Substitution::new());
            prop_assert_eq!(found.len(), 1);
            prop_assert_eq!(found[0].apply(&p), target);
        }
    }
}
