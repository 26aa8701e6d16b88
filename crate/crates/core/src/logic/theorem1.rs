//! The correspondence between assignments satisfying `K(k₀)` in `k` and
//! homomorphisms `k₀ ↦ k`.

use std::sync::Arc;

use crate::algebra::{Substitution, Term};
use crate::homomorphism::Homomorphism;
use crate::skeleton::Skeleton;

use super::extract::SkeletonFormula;
use super::semantics::{enumerate_assignments, eval_atom};
use super::{skeleton_formula, LogicError};

/// `δ = (α ∘ Z, α)` restricted to the message variables of `k₀`.
pub fn homomorphism_from_assignment(
    k0: &Arc<Skeleton>,
    k: &Arc<Skeleton>,
    sf: &SkeletonFormula,
    alpha: &Substitution,
) -> Result<Homomorphism, LogicError> {
    let mut map = Vec::with_capacity(sf.strand_vars.len());
    for z in &sf.strand_vars {
        let s = alpha
            .get(z)
            .and_then(Term::is_ground_nat)
            .ok_or_else(|| LogicError::Unassigned(z.name.clone()))?;
        map.push(s as usize);
    }
    let keep: Vec<_> = sf.message_vars().collect();
    let sigma = alpha.restrict(keep.iter());
    Homomorphism::new(k0.clone(), k.clone(), map, sigma)
        .map_err(|e| LogicError::Theorem1(e.to_string()))
}

/// `α(Z(j)) = φ(j)` and `α(x) = σ(x)`.
pub fn assignment_from_homomorphism(sf: &SkeletonFormula, delta: &Homomorphism) -> Substitution {
    let mut alpha = Substitution::new();
    for (j, z) in sf.strand_vars.iter().enumerate() {
        alpha.insert_unchecked(z.clone(), Term::Nat(delta.strand_map()[j] as u64));
    }
    for x in sf.message_vars() {
        let image = delta
            .subst()
            .get(&x)
            .cloned()
            .unwrap_or_else(|| Term::Var(x.clone()));
        alpha.insert_unchecked(x, image);
    }
    alpha
}

/// Whether `∃X. Φ` holds in `k`, where `K(k₀) = (X, Φ)`. Every satisfying
/// assignment must yield a verified homomorphism; one that does not is
/// reported as an error.
pub fn theorem1_check(k0: &Arc<Skeleton>, k: &Arc<Skeleton>) -> Result<bool, LogicError> {
    let sf = skeleton_formula(k0);
    let found = enumerate_assignments(k, &sf.formula, &Substitution::new())?;
    for alpha in &found {
        homomorphism_from_assignment(k0, k, &sf, alpha)?;
    }
    Ok(!found.is_empty())
}

/// The reverse direction: the assignment built from `delta` satisfies
/// every atom of `K(source)` in the target.
pub fn theorem1_reverse(delta: &Homomorphism) -> Result<bool, LogicError> {
    let sf = skeleton_formula(delta.source());
    let alpha = assignment_from_homomorphism(&sf, delta);
    for atom in &sf.formula.atoms {
        if !eval_atom(delta.target(), &alpha, atom)? {
            return Ok(false);
        }
    }
    Ok(true)
}
