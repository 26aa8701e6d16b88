//! Model-theoretic goal checking: a goal is achieved by an analysis when it
//! holds in every shape under every assignment satisfying its hypothesis.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{Substitution, Var};
use crate::skeleton::Skeleton;

use super::semantics::{enumerate_assignments, first_assignment, mode_check, progress_binding};
use super::{Atom, Conjunction, Goal, LogicError, ShapeAnalysis};

pub const COMPLETENESS_CAVEAT: &str = "assumes the shape analysis is complete and its shapes \
are realized; neither assumption is checked";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Achieved,
    Counterexample,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Achieved => "ACHIEVED",
            Verdict::Counterexample => "COUNTEREXAMPLE",
        })
    }
}

/// One shape together with one assignment satisfying the hypothesis there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub shape: usize,
    pub assignment: Substitution,
    /// The first satisfied disjunct and its extended assignment.
    pub satisfied: Option<(usize, Substitution)>,
    /// Why no disjunct holds; empty when one does.
    pub explanation: Vec<String>,
}

impl Case {
    pub fn holds(&self) -> bool {
        self.satisfied.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalReport {
    pub verdict: Verdict,
    /// Sorted by shape, then by enumeration order.
    pub cases: Vec<Case>,
}

impl GoalReport {
    pub fn counterexamples(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.holds())
    }

    pub fn caveat(&self) -> Option<&'static str> {
        (self.verdict == Verdict::Achieved).then_some(COMPLETENESS_CAVEAT)
    }
}

impl fmt::Display for GoalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.verdict)?;
        match self.verdict {
            Verdict::Achieved => {
                writeln!(
                    f,
                    "checked {} case(s); every one satisfies a disjunct",
                    self.cases.len()
                )?;
                writeln!(f, "note: {COMPLETENESS_CAVEAT}")
            }
            Verdict::Counterexample => {
                for c in self.counterexamples() {
                    writeln!(f, "shape {} with {}", c.shape, c.assignment)?;
                    for line in &c.explanation {
                        writeln!(f, "  {line}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Checks scoping and modes of `g` against the analysis' protocol.
fn check_modes(g: &Goal) -> Result<(), LogicError> {
    mode_check(&g.hypothesis.atoms, &BTreeSet::new())?;
    let grounded = g.hypothesis.free_vars();
    for d in &g.conclusion {
        for v in d.free_vars() {
            if g.hypothesis.vars.contains(&v) && !grounded.contains(&v) {
                return Err(LogicError::Mode(v.name));
            }
        }
        mode_check(&d.atoms, &grounded)?;
    }
    Ok(())
}

pub fn check_goal(sa: &ShapeAnalysis, g: &Goal) -> Result<GoalReport, LogicError> {
    g.check(sa.pov().protocol())?;
    check_modes(g)?;
    let mut cases = Vec::new();
    for (i, delta) in sa.shapes().iter().enumerate() {
        let k = delta.target();
        for alpha in enumerate_assignments(k, &g.hypothesis, &Substitution::new())? {
            let mut satisfied = None;
            for (j, d) in g.conclusion.iter().enumerate() {
                if let Some(beta) = first_assignment(k, d, &alpha)? {
                    satisfied = Some((j, beta));
                    break;
                }
            }
            let explanation = if satisfied.is_some() {
                Vec::new()
            } else {
                explain(k, g, &alpha)?
            };
            cases.push(Case {
                shape: i,
                assignment: alpha,
                satisfied,
                explanation,
            });
        }
    }
    let verdict = if cases.iter().all(Case::holds) {
        Verdict::Achieved
    } else {
        Verdict::Counterexample
    };
    Ok(GoalReport { verdict, cases })
}

fn explain(k: &Skeleton, g: &Goal, alpha: &Substitution) -> Result<Vec<String>, LogicError> {
    if g.conclusion.is_empty() {
        return Ok(vec!["the conclusion is false".into()]);
    }
    let bound: BTreeSet<Var> = alpha.domain().cloned().collect();
    let mut out = Vec::new();
    for (j, d) in g.conclusion.iter().enumerate() {
        let mut blamed = false;
        for atom in &d.atoms {
            if mode_check(std::slice::from_ref(atom), &bound).is_err() {
                continue;
            }
            let single = Conjunction::new(d.vars.clone(), vec![atom.clone()]);
            if first_assignment(k, &single, alpha)?.is_some() {
                continue;
            }
            blamed = true;
            let shown = atom.substitute(alpha);
            out.push(format!("disjunct {j}: {shown} is unsatisfiable"));
            if let Atom::Progress {
                role, height, var, ..
            } = atom
            {
                let bindings: Vec<String> = (0..k.strand_count())
                    .filter_map(|s| {
                        let sigma = progress_binding(k, role, *height, s)?;
                        let value = sigma.get(var)?;
                        Some(format!("strand {s} binds {} to {value}", var.name))
                    })
                    .collect();
                if bindings.is_empty() {
                    out.push(format!(
                        "  no strand is compatible with role {role} up to height {height}"
                    ));
                } else {
                    out.extend(bindings.into_iter().map(|b| format!("  {b}")));
                }
            }
        }
        if !blamed {
            out.push(format!(
                "disjunct {j}: each atom is satisfiable alone but not all together"
            ));
        }
    }
    Ok(out)
}
