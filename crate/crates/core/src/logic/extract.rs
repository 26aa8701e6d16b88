//! `K(k)` and the shape analysis sentence of an analysis.

use std::collections::BTreeSet;

use crate::algebra::{Sort, Substitution, Term, Var, VariableSet};
use crate::skeleton::{Node, Skeleton};

use super::{Atom, Conjunction, Goal, Sentence, ShapeAnalysis};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Emit `prec` for every pair of the effective order, strand succession
    /// included, instead of the stored edges only.
    pub full_order: bool,
}

/// `K(k) = (Y, Φ)` together with the strand variables `Z`, where `Z[s]` is
/// the variable standing for strand `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonFormula {
    pub formula: Conjunction,
    pub strand_vars: Vec<Var>,
}

impl SkeletonFormula {
    pub fn vars(&self) -> &VariableSet {
        &self.formula.vars
    }

    /// The message variables of `Y`, those of the skeleton.
    pub fn message_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.formula.vars.iter().filter(|v| v.sort != Sort::Nat)
    }
}

/// `K(k)` with strand variables `z0, z1, ...`, skipping names the skeleton
/// already uses.
pub fn skeleton_formula(k: &Skeleton) -> SkeletonFormula {
    skeleton_formula_with(k, ExtractOptions::default())
}

pub fn skeleton_formula_with(k: &Skeleton, opts: ExtractOptions) -> SkeletonFormula {
    let mut names = Names::new(k.vars().iter().map(|v| v.name));
    let strand_vars = names.strand_vars(k.strand_count());
    build(k, &Substitution::new(), k.vars().clone(), strand_vars, opts)
}

/// Name supply shared by the point of view and every shape.
struct Names {
    used: BTreeSet<String>,
    next_z: usize,
}

impl Names {
    fn new(used: impl IntoIterator<Item = String>) -> Names {
        Names {
            used: used.into_iter().collect(),
            next_z: 0,
        }
    }

    fn strand_vars(&mut self, n: usize) -> Vec<Var> {
        (0..n)
            .map(|_| loop {
                let name = format!("z{}", self.next_z);
                self.next_z += 1;
                if self.used.insert(name.clone()) {
                    break Var::new(name, Sort::Nat);
                }
            })
            .collect()
    }
}

fn build(
    k: &Skeleton,
    rename: &Substitution,
    vars: VariableSet,
    strand_vars: Vec<Var>,
    opts: ExtractOptions,
) -> SkeletonFormula {
    let z = |s: usize| Term::Var(strand_vars[s].clone());
    let mut atoms = Vec::new();
    for (s, inst) in k.instances().iter().enumerate() {
        for x in inst.role.prefix_vars(inst.height) {
            let t = inst
                .subst
                .get(&x)
                .expect("instance binds its prefix variables");
            atoms.push(Atom::Progress {
                role: inst.role.name.clone(),
                height: inst.height,
                var: x.clone(),
                strand: z(s),
                msg: rename.apply(t),
            });
        }
    }
    let prec = |a: Node, b: Node| Atom::Prec {
        strand: z(a.strand),
        index: a.index,
        later_strand: z(b.strand),
        later_index: b.index,
    };
    if opts.full_order {
        let order = k
            .effective_order()
            .expect("skeleton formulas are extracted from well-formed skeletons");
        atoms.extend(order.into_iter().map(|(a, b)| prec(a, b)));
    } else {
        atoms.extend(k.orderings().iter().map(|&(a, b)| prec(a, b)));
    }
    atoms.extend(k.non_orig().iter().map(|t| Atom::Non(rename.apply(t))));
    atoms.extend(k.uniq_orig().iter().map(|t| Atom::Uniq(rename.apply(t))));
    for t in k.uniq_orig() {
        for n in k.origination_nodes(t) {
            atoms.push(Atom::Orig {
                term: rename.apply(t),
                strand: z(n.strand),
                index: n.index,
            });
        }
    }
    let mut all = vars;
    for v in &strand_vars {
        all.declare(v.name.clone(), Sort::Nat)
            .expect("strand variable names are fresh");
    }
    SkeletonFormula {
        formula: Conjunction::new(all, atoms),
        strand_vars,
    }
}

/// `∀X₀ (Φ₀ ⊃ ⋁ᵢ ∃Xᵢ (Δᵢ ∧ Φᵢ))`.
///
/// Shape variables whose names occur in `X₀` are renamed to `name_i`, with
/// `i` the one-based shape number, or `name_i_n` when that is taken too.
/// Strand variables are numbered `z0, z1, ...` across the point of view and
/// then each shape in turn.
pub fn shape_analysis_sentence(sa: &ShapeAnalysis, opts: ExtractOptions) -> Sentence {
    let k0 = sa.pov();
    let mut names = Names::new(k0.vars().iter().map(|v| v.name));
    let z0 = names.strand_vars(k0.strand_count());
    let pov = build(k0, &Substitution::new(), k0.vars().clone(), z0, opts);
    let x0: BTreeSet<String> = pov.formula.vars.iter().map(|v| v.name).collect();

    let mut conclusion = Vec::new();
    for (i, delta) in sa.shapes().iter().enumerate() {
        let ki = delta.target();
        let own: BTreeSet<String> = ki.vars().iter().map(|v| v.name).collect();
        let mut taken: BTreeSet<String> = x0.union(&own).cloned().collect();
        taken.extend(names.used.iter().cloned());
        let mut rename = Substitution::new();
        let mut vars = VariableSet::new();
        for v in ki.vars().iter() {
            let name = if x0.contains(&v.name) {
                let base = format!("{}_{}", v.name, i + 1);
                let mut candidate = base.clone();
                let mut n = 1;
                while taken.contains(&candidate) {
                    candidate = format!("{base}_{n}");
                    n += 1;
                }
                taken.insert(candidate.clone());
                candidate
            } else {
                v.name.clone()
            };
            rename.insert_unchecked(v.clone(), Term::var(name.clone(), v.sort));
            vars.declare(name, v.sort)
                .expect("renamed variables are distinct");
        }
        names.used.extend(taken);
        let zi = names.strand_vars(ki.strand_count());
        let shape = build(ki, &rename, vars, zi, opts);

        let mut atoms = Vec::new();
        for (j, &target) in delta.strand_map().iter().enumerate() {
            atoms.push(Atom::Eq(
                Term::Var(pov.strand_vars[j].clone()),
                Term::Var(shape.strand_vars[target].clone()),
            ));
        }
        for x in k0.vars().iter() {
            let image = delta
                .subst()
                .get(&x)
                .cloned()
                .unwrap_or_else(|| Term::Var(x.clone()));
            atoms.push(Atom::Eq(Term::Var(x), rename.apply(&image)));
        }
        atoms.extend(shape.formula.atoms);
        conclusion.push(Conjunction::new(shape.formula.vars, atoms));
    }

    Goal {
        protocol: k0.protocol().name.clone(),
        hypothesis: pov.formula,
        conclusion,
    }
}
