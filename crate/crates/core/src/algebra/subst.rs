use std::collections::BTreeMap;
use std::fmt;

use super::{AlgebraError, Term, Var};

/// A sort-preserving map from variables to canonical terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Binds `var` to `term`, rejecting sort violations and rebinding to a
    /// different value.
    pub fn bind(&mut self, var: Var, term: Term) -> Result<(), AlgebraError> {
        let sort = term.check_sort()?;
        if !sort.leq(var.sort) {
            return Err(AlgebraError::Sort(format!(
                "cannot bind {} of sort {} to {term} of sort {sort}",
                var.name, var.sort
            )));
        }
        let term = term.canon();
        if let Some(old) = self.bindings.get(&var) {
            if *old != term {
                return Err(AlgebraError::Conflict {
                    var: var.name,
                    old: old.to_string(),
                    new: term.to_string(),
                });
            }
            return Ok(());
        }
        self.bindings.insert(var, term);
        Ok(())
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (Var, Term)>,
    ) -> Result<Substitution, AlgebraError> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t)?;
        }
        Ok(s)
    }

    pub fn with(mut self, var: Var, term: Term) -> Result<Substitution, AlgebraError> {
        self.bind(var, term)?;
        Ok(self)
    }

    // Caller guarantees the binding is canonical and sort-preserving.
    pub(crate) fn insert_unchecked(&mut self, var: Var, term: Term) {
        self.bindings.insert(var, term);
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn get_by_name(&self, name: &str) -> Option<(&Var, &Term)> {
        self.bindings.iter().find(|(v, _)| v.name == name)
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Applies the substitution and canonicalizes. Variables outside the
    /// domain are left unchanged.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Nat(_) => t.clone(),
            Term::Pair(l, r) => Term::pair(self.apply(l), self.apply(r)),
            Term::Enc(b, k) => Term::enc(self.apply(b), self.apply(k)),
            Term::Invk(k) => Term::inverse(self.apply(k)),
        }
    }

    /// `self ∘ first`: applying the result equals applying `first`, then `self`.
    pub fn compose(&self, first: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &first.bindings {
            out.bindings.insert(v.clone(), self.apply(t));
        }
        for (v, t) in &self.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(t) = self.bindings.get(v) {
                out.bindings.insert(v.clone(), t.clone());
            }
        }
        out
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", v.name, t)?;
        }
        f.write_str("}")
    }
}
