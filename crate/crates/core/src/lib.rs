//! Strand-space skeletons, shape analysis sentences, and model-theoretic
//! checking of security goals against a shape analysis.

pub mod algebra;
pub mod fixtures;
pub mod frontend;
pub mod homomorphism;
pub mod logic;
pub mod skeleton;

pub use algebra::{Sort, Substitution, Term, Var, VariableSet};
pub use homomorphism::{verify, Homomorphism};
pub use logic::{check_goal, Goal, ShapeAnalysis, Verdict};
pub use skeleton::{Protocol, Skeleton};
