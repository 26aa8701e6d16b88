use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use super::AlgebraError;

/// Sorts of the message algebra, plus `Nat` for strand and event indices.
///
/// The subsort order is `Akey < Top`, `Skey < Top`, `Data < Top`. `Nat` is
/// unrelated to every message sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Top,
    Akey,
    Skey,
    Data,
    Nat,
}

impl Sort {
    pub const ALL: [Sort; 5] = [Sort::Top, Sort::Akey, Sort::Skey, Sort::Data, Sort::Nat];

    /// `self <= other` in the subsort order.
    pub fn leq(self, other: Sort) -> bool {
        self == other || (other == Sort::Top && self.is_atomic())
    }

    /// Atom sorts: asymmetric keys, symmetric keys and data.
    pub fn is_atomic(self) -> bool {
        matches!(self, Sort::Akey | Sort::Skey | Sort::Data)
    }

    pub fn is_key(self) -> bool {
        matches!(self, Sort::Akey | Sort::Skey)
    }

    pub fn is_message(self) -> bool {
        self != Sort::Nat
    }

    /// Surface name used in S-expression input.
    pub fn name(self) -> &'static str {
        match self {
            Sort::Top => "mesg",
            Sort::Akey => "akey",
            Sort::Skey => "skey",
            Sort::Data => "data",
            Sort::Nat => "strd",
        }
    }

    pub fn from_name(name: &str) -> Option<Sort> {
        Sort::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Var {
        Var {
            name: name.into(),
            sort,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// An order-sorted term. Message terms are built from variables with
/// pairing, encryption and key inverse; `Nat` literals only appear as
/// arguments of formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Pair(Box<Term>, Box<Term>),
    Enc(Box<Term>, Box<Term>),
    Invk(Box<Term>),
    Nat(u64),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn pair(left: Term, right: Term) -> Term {
        Term::Pair(Box::new(left), Box::new(right))
    }

    pub fn enc(body: Term, key: Term) -> Term {
        Term::Enc(Box::new(body), Box::new(key))
    }

    /// Raw inverse node; use [`Term::inverse`] to stay canonical.
    pub fn invk(key: Term) -> Term {
        Term::Invk(Box::new(key))
    }

    /// Key inverse of a canonical key, returned in canonical form.
    pub fn inverse(key: Term) -> Term {
        match key {
            Term::Invk(inner) => *inner,
            k if k.sort() == Sort::Skey => k,
            k => Term::invk(k),
        }
    }

    /// Right-associated tuple; `None` for an empty slice.
    pub fn tuple(mut items: Vec<Term>) -> Option<Term> {
        let mut acc = items.pop()?;
        while let Some(t) = items.pop() {
            acc = Term::pair(t, acc);
        }
        Some(acc)
    }

    /// The least sort of a well-formed term.
    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::Pair(..) | Term::Enc(..) => Sort::Top,
            Term::Invk(k) => k.sort(),
            Term::Nat(_) => Sort::Nat,
        }
    }

    /// Checks the sorting rules of the signature and returns the least sort.
    pub fn check_sort(&self) -> Result<Sort, AlgebraError> {
        match self {
            Term::Var(v) => Ok(v.sort),
            Term::Nat(_) => Ok(Sort::Nat),
            Term::Pair(l, r) => {
                for part in [l, r] {
                    if !part.check_sort()?.is_message() {
                        return Err(AlgebraError::Sort(format!(
                            "pair component {part} is not a message"
                        )));
                    }
                }
                Ok(Sort::Top)
            }
            Term::Enc(body, key) => {
                if !body.check_sort()?.is_message() {
                    return Err(AlgebraError::Sort(format!(
                        "encryption body {body} is not a message"
                    )));
                }
                let ks = key.check_sort()?;
                if !ks.is_key() {
                    return Err(AlgebraError::Sort(format!(
                        "encryption key {key} has sort {ks}, expected akey or skey"
                    )));
                }
                Ok(Sort::Top)
            }
            Term::Invk(k) => {
                let ks = k.check_sort()?;
                if !ks.is_key() {
                    return Err(AlgebraError::Sort(format!(
                        "invk applied to {k} of sort {ks}, expected akey or skey"
                    )));
                }
                Ok(ks)
            }
        }
    }

    /// Canonical representative: fewest occurrences of key inverse.
    pub fn canonicalize(&self) -> Result<Term, AlgebraError> {
        self.check_sort()?;
        Ok(self.canon())
    }

    // Assumes well-sorted input.
    pub(crate) fn canon(&self) -> Term {
        match self {
            Term::Var(_) | Term::Nat(_) => self.clone(),
            Term::Pair(l, r) => Term::pair(l.canon(), r.canon()),
            Term::Enc(b, k) => Term::enc(b.canon(), k.canon()),
            Term::Invk(k) => Term::inverse(k.canon()),
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            Term::Var(_) | Term::Nat(_) => true,
            Term::Pair(l, r) | Term::Enc(l, r) => l.is_canonical() && r.is_canonical(),
            Term::Invk(k) => matches!(**k, Term::Var(ref v) if v.sort == Sort::Akey),
        }
    }

    pub fn is_ground_nat(&self) -> Option<u64> {
        match self {
            Term::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Pair(l, r) | Term::Enc(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Invk(k) => k.collect_vars(out),
            Term::Nat(_) => {}
        }
    }

    /// Every subterm, including the term itself and encryption keys.
    pub fn subterms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        out.insert(self.clone());
        match self {
            Term::Pair(l, r) | Term::Enc(l, r) => {
                l.collect_subterms(out);
                r.collect_subterms(out);
            }
            Term::Invk(k) => k.collect_subterms(out),
            Term::Var(_) | Term::Nat(_) => {}
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Nat(_) => 1,
            Term::Pair(l, r) | Term::Enc(l, r) => 1 + l.depth().max(r.depth()),
            Term::Invk(k) => 1 + k.depth(),
        }
    }

    /// `self` is carried by `other`: reachable through pair components and
    /// encryption bodies, never through keys.
    pub fn carried_by(&self, other: &Term) -> bool {
        if self == other {
            return true;
        }
        match other {
            Term::Pair(l, r) => self.carried_by(l) || self.carried_by(r),
            Term::Enc(body, _) => self.carried_by(body),
            _ => false,
        }
    }

    /// Maximal subterms of atomic sort, including keys and inverses.
    pub fn atoms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Term>) {
        match self {
            Term::Pair(l, r) | Term::Enc(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            t if t.sort().is_atomic() => {
                out.insert(t.clone());
            }
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::Nat(n) => write!(f, "{n}"),
            Term::Invk(k) => write!(f, "(invk {k})"),
            Term::Enc(b, k) => write!(f, "(enc {b} {k})"),
            Term::Pair(l, r) => {
                write!(f, "(cat {l}")?;
                let mut rest = &**r;
                while let Term::Pair(a, b) = rest {
                    write!(f, " {a}")?;
                    rest = b;
                }
                write!(f, " {rest})")
            }
        }
    }
}

/// A variable set: each name has exactly one sort. Declaration order is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableSet {
    vars: IndexMap<String, Sort>,
}

impl VariableSet {
    pub fn new() -> VariableSet {
        VariableSet::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, sort: Sort) -> Result<Var, AlgebraError> {
        let name = name.into();
        match self.vars.get(&name) {
            Some(&s) if s != sort => Err(AlgebraError::Redeclared {
                name,
                first: s,
                second: sort,
            }),
            _ => {
                self.vars.insert(name.clone(), sort);
                Ok(Var { name, sort })
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<Var> {
        self.vars.get(name).map(|&sort| Var::new(name, sort))
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.vars.get(&var.name) == Some(&var.sort)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars.iter().map(|(n, &s)| Var::new(n.clone(), s))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

impl FromIterator<Var> for VariableSet {
    /// Later duplicates overwrite earlier ones; callers guarantee uniqueness.
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        VariableSet {
            vars: iter.into_iter().map(|v| (v.name, v.sort)).collect(),
        }
    }
}
