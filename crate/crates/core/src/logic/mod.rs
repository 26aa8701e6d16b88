//! The goal language over a protocol: formulas, skeleton formulas, shape
//! analysis sentences, satisfaction in skeletons, and goal checking.

mod characteristic;
mod extract;
mod formula;
mod goal;
mod semantics;
mod theorem1;

use std::sync::Arc;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::homomorphism::{HomError, Homomorphism};
use crate::skeleton::{Skeleton, SkeletonError};

pub use characteristic::characteristic_skeleton;
pub use extract::{
    shape_analysis_sentence, skeleton_formula, skeleton_formula_with, ExtractOptions,
    SkeletonFormula,
};
pub use formula::{Atom, Conjunction, Goal, Sentence};
pub use goal::{check_goal, Case, GoalReport, Verdict};
pub use semantics::{
    enumerate_assignments, eval_atom, first_assignment, mode_check, progress_binding,
};
pub use theorem1::{
    assignment_from_homomorphism, homomorphism_from_assignment, theorem1_check, theorem1_reverse,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("{0}")]
    BadAtom(String),
    #[error("role {role} is not part of protocol {protocol}")]
    UnknownRole { protocol: String, role: String },
    #[error("formula is about protocol {found}, expected {expected}")]
    ProtocolMismatch { expected: String, found: String },
    #[error("variable {0} is not bound by any quantifier")]
    UnboundVar(String),
    #[error("variable {0} is not grounded by any atom (formula is not well-moded)")]
    Mode(String),
    #[error("variable {0} has no value in the assignment")]
    Unassigned(String),
    #[error("strand variable {var} is used with roles {first} and {second}")]
    RoleConflict {
        var: String,
        first: String,
        second: String,
    },
    #[error("strand variable {0}: role bindings do not match one trace jointly")]
    BindingConflict(String),
    #[error("unsupported in a characteristic formula: {0}")]
    Unsupported(String),
    #[error("characteristic skeleton is ill-formed: {0}")]
    IllFormed(String),
    #[error("{0}")]
    OrigInconsistent(String),
    #[error("homomorphism construction failed: {0}")]
    Theorem1(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

/// A point-of-view skeleton with homomorphisms onto each of its shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeAnalysis {
    pov: Arc<Skeleton>,
    shapes: Vec<Homomorphism>,
}

impl ShapeAnalysis {
    /// Every homomorphism must start at `pov`.
    pub fn new(pov: Arc<Skeleton>, shapes: Vec<Homomorphism>) -> Result<ShapeAnalysis, HomError> {
        if shapes.iter().any(|h| **h.source() != *pov) {
            return Err(HomError::Mismatch);
        }
        Ok(ShapeAnalysis { pov, shapes })
    }

    pub fn pov(&self) -> &Arc<Skeleton> {
        &self.pov
    }

    pub fn shapes(&self) -> &[Homomorphism] {
        &self.shapes
    }

    pub fn shape(&self, i: usize) -> &Skeleton {
        self.shapes[i].target()
    }
}
