//! Skeleton homomorphisms `(φ, σ)`: a strand map paired with a message
//! substitution, checked against the seven structure-preservation
//! conditions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Substitution, Term};
use crate::skeleton::{Node, Skeleton};

/// The numbered homomorphism conditions, plus well-formedness of the two
/// skeletons, which the conditions presuppose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    WellFormed,
    StrandMap,
    Substitution,
    Events,
    Order,
    NonOrig,
    UniqOrig,
    Origination,
}

impl Condition {
    /// Condition number; 0 stands for a malformed source or target.
    pub fn number(self) -> u8 {
        match self {
            Condition::WellFormed => 0,
            Condition::StrandMap => 1,
            Condition::Substitution => 2,
            Condition::Events => 3,
            Condition::Order => 4,
            Condition::NonOrig => 5,
            Condition::UniqOrig => 6,
            Condition::Origination => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub condition: Condition,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.condition {
            Condition::WellFormed => write!(f, "ill-formed skeleton: {}", self.detail),
            c => write!(f, "condition {} fails: {}", c.number(), self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomReport {
    pub failures: Vec<Failure>,
}

impl HomReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, condition: Condition) -> bool {
        self.failures.iter().any(|f| f.condition == condition)
    }

    pub fn conditions(&self) -> BTreeSet<u8> {
        self.failures.iter().map(|f| f.condition.number()).collect()
    }

    fn push(&mut self, condition: Condition, detail: String) {
        self.failures.push(Failure { condition, detail });
    }
}

impl fmt::Display for HomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("homomorphism verified");
        }
        for (i, fail) in self.failures.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{fail}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("not a homomorphism:\n{0}")]
    Invalid(HomReport),
    #[error("cannot compose: target of the first map is not the source of the second")]
    Mismatch,
    #[error("node {0} is not a node of the source skeleton")]
    NotASourceNode(Node),
}

/// Source variables not bound by `subst` map to themselves.
fn total_subst(source: &Skeleton, subst: &Substitution) -> Substitution {
    let mut out = subst.clone();
    for v in source.vars().iter() {
        if !out.contains(&v) {
            out.insert_unchecked(v.clone(), Term::Var(v));
        }
    }
    out
}

/// Checks every condition and reports each failure.
pub fn verify(
    source: &Skeleton,
    target: &Skeleton,
    strand_map: &[usize],
    subst: &Substitution,
) -> HomReport {
    let mut report = HomReport::default();

    for (label, k) in [("source", source), ("target", target)] {
        for v in k.check_wellformed().violations {
            report.push(Condition::WellFormed, format!("{label}: {v}"));
        }
    }
    if source.protocol().name != target.protocol().name {
        report.push(
            Condition::WellFormed,
            format!(
                "protocols differ: {} and {}",
                source.protocol().name,
                target.protocol().name
            ),
        );
    }

    // 1
    if strand_map.len() != source.strand_count() {
        report.push(
            Condition::StrandMap,
            format!(
                "strand map has {} entries for {} source strands",
                strand_map.len(),
                source.strand_count()
            ),
        );
        return report;
    }
    for (s, &image) in strand_map.iter().enumerate() {
        if image >= target.strand_count() {
            report.push(
                Condition::StrandMap,
                format!("strand {s} maps to {image}, which is not a target strand"),
            );
        }
    }
    if report.failed(Condition::StrandMap) {
        return report;
    }
    let node_image = |n: Node| Node::new(strand_map[n.strand], n.index);

    // 2
    for (v, t) in subst.iter() {
        if !source.vars().contains(v) {
            report.push(
                Condition::Substitution,
                format!("{} is not a source variable", v.name),
            );
        }
        if !t.sort().leq(v.sort) {
            report.push(
                Condition::Substitution,
                format!(
                    "{} of sort {} mapped to {t} of sort {}",
                    v.name,
                    v.sort,
                    t.sort()
                ),
            );
        }
    }
    let sigma = total_subst(source, subst);
    for (v, t) in sigma.iter() {
        for w in t.vars() {
            if !target.vars().contains(&w) {
                report.push(
                    Condition::Substitution,
                    format!(
                        "image of {} uses {}, which is not a target variable",
                        v.name, w.name
                    ),
                );
            }
        }
    }

    // 3
    for n in source.nodes() {
        let evt = source.event(n).unwrap();
        let image = node_image(n);
        match target.event(image) {
            None => report.push(
                Condition::Events,
                format!("node {n} maps to {image}, which is not a target node"),
            ),
            Some(t_evt) => {
                let mapped = sigma.apply(&evt.msg);
                if evt.dir != t_evt.dir || mapped != t_evt.msg {
                    report.push(
                        Condition::Events,
                        format!(
                            "event at {n} maps to {}{mapped}, but {image} has {t_evt}",
                            if evt.dir == crate::skeleton::Direction::Send {
                                "+"
                            } else {
                                "-"
                            }
                        ),
                    );
                }
            }
        }
    }

    // 4
    if let Ok(order) = source.effective_order() {
        for (a, b) in order {
            let (ia, ib) = (node_image(a), node_image(b));
            if !target.precedes(ia, ib) {
                report.push(
                    Condition::Order,
                    format!("{a} precedes {b}, but {ia} does not precede {ib}"),
                );
            }
        }
    }

    // 5
    for t in source.non_orig() {
        let image = sigma.apply(t);
        if !target.non_orig().contains(&image) {
            report.push(
                Condition::NonOrig,
                format!("image {image} of non-originating {t} is not non-originating"),
            );
        }
    }

    // 6 and 7
    for t in source.uniq_orig() {
        let image = sigma.apply(t);
        if !target.uniq_orig().contains(&image) {
            report.push(
                Condition::UniqOrig,
                format!("image {image} of uniquely originating {t} is not uniquely originating"),
            );
        }
        let target_origins = target.origination_nodes(&image);
        for n in source.origination_nodes(t) {
            let img = node_image(n);
            if !target_origins.contains(&img) {
                report.push(
                    Condition::Origination,
                    format!("{t} originates at {n}, but {image} does not originate at {img}"),
                );
            }
        }
    }

    report
}

/// A verified skeleton homomorphism. Only constructible through [`verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    source: Arc<Skeleton>,
    target: Arc<Skeleton>,
    strand_map: Vec<usize>,
    subst: Substitution,
}

impl Homomorphism {
    pub fn new(
        source: Arc<Skeleton>,
        target: Arc<Skeleton>,
        strand_map: Vec<usize>,
        subst: Substitution,
    ) -> Result<Homomorphism, HomError> {
        let report = verify(&source, &target, &strand_map, &subst);
        if !report.is_ok() {
            return Err(HomError::Invalid(report));
        }
        let subst = total_subst(&source, &subst);
        Ok(Homomorphism {
            source,
            target,
            strand_map,
            subst,
        })
    }

    pub fn identity(k: Arc<Skeleton>) -> Result<Homomorphism, HomError> {
        let map = (0..k.strand_count()).collect();
        Homomorphism::new(k.clone(), k, map, Substitution::new())
    }

    pub fn source(&self) -> &Arc<Skeleton> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Skeleton> {
        &self.target
    }

    pub fn strand_map(&self) -> &[usize] {
        &self.strand_map
    }

    /// Total on the source variables.
    pub fn subst(&self) -> &Substitution {
        &self.subst
    }

    pub fn apply_node(&self, n: Node) -> Result<Node, HomError> {
        if !self.source.is_node(n) {
            return Err(HomError::NotASourceNode(n));
        }
        Ok(Node::new(self.strand_map[n.strand], n.index))
    }

    /// `second ∘ self`.
    pub fn then(&self, second: &Homomorphism) -> Result<Homomorphism, HomError> {
        if *self.target != *second.source {
            return Err(HomError::Mismatch);
        }
        let map = self
            .strand_map
            .iter()
            .map(|&s| second.strand_map[s])
            .collect();
        Homomorphism::new(
            self.source.clone(),
            second.target.clone(),
            map,
            second
                .subst
                .compose(&self.subst)
                .restrict(self.subst.domain()),
        )
    }
}

/// `compose_hom(δ₂, δ₁) = δ₂ ∘ δ₁`.
pub fn compose_hom(second: &Homomorphism, first: &Homomorphism) -> Result<Homomorphism, HomError> {
    first.then(second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Sort, Var};
    use crate::fixtures::blanchet;
    use crate::skeleton::Skeleton;

    fn delta1() -> Homomorphism {
        let (map, sigma) = blanchet::delta1();
        Homomorphism::new(
            Arc::new(blanchet::k0()),
            Arc::new(blanchet::k1()),
            map,
            sigma,
        )
        .unwrap()
    }

    #[test]
    fn delta1_verifies() {
        let (map, sigma) = blanchet::delta1();
        let report = verify(&blanchet::k0(), &blanchet::k1(), &map, &sigma);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn identity_verifies() {
        for k in [blanchet::k0(), blanchet::k1()] {
            Homomorphism::identity(Arc::new(k)).unwrap();
        }
    }

    #[test]
    fn wrong_key_fails_condition_3() {
        let (map, sigma) = blanchet::delta1();
        let mut bad = Substitution::new();
        for (v, t) in sigma.iter() {
            if v.name == "b" {
                bad.bind(v.clone(), Term::var("b'", Sort::Akey)).unwrap();
            } else {
                bad.bind(v.clone(), t.clone()).unwrap();
            }
        }
        let report = verify(&blanchet::k0(), &blanchet::k1(), &map, &bad);
        // b' is also not assumed non-originating in the shape.
        assert_eq!(report.conditions(), [3, 5].into_iter().collect());
        assert_eq!(report.failures[0].condition, Condition::Events);
        assert!(report.failures[0].detail.contains("(0 0)"));
    }

    #[test]
    fn missing_target_strand_fails_condition_1() {
        let (_, sigma) = blanchet::delta1();
        let report = verify(&blanchet::k0(), &blanchet::k1(), &[5], &sigma);
        assert_eq!(report.conditions(), [1].into_iter().collect());
    }

    #[test]
    fn apply_node_maps_strands() {
        let d = delta1();
        assert_eq!(d.apply_node(Node::new(0, 1)).unwrap(), Node::new(0, 1));
        assert!(d.apply_node(Node::new(0, 2)).is_err());
        let id = Homomorphism::identity(Arc::new(blanchet::k1())).unwrap();
        assert_eq!(id.apply_node(Node::new(1, 0)).unwrap(), Node::new(1, 0));
    }

    #[test]
    fn apply_node_through_strand_map() {
        // k0 into a three-strand skeleton whose responder is strand 2.
        let k1 = blanchet::k1();
        let mut instances = k1.instances().to_vec();
        instances.swap(0, 1);
        let resp = instances.remove(1);
        instances.push(instances[0].clone());
        instances.push(resp);
        let wide = Skeleton::new(
            k1.protocol().clone(),
            k1.vars().clone(),
            instances,
            [(Node::new(0, 0), Node::new(2, 0))],
            k1.non_orig().iter().cloned(),
            [],
        )
        .unwrap();
        let k0 = blanchet::k0();
        let k0_no_uniq = Skeleton::new(
            k0.protocol().clone(),
            k0.vars().clone(),
            k0.instances().to_vec(),
            [],
            k0.non_orig().iter().cloned(),
            [],
        )
        .unwrap();
        let (_, sigma) = blanchet::delta1();
        let d = Homomorphism::new(Arc::new(k0_no_uniq), Arc::new(wide), vec![2], sigma).unwrap();
        assert_eq!(d.apply_node(Node::new(0, 0)).unwrap(), Node::new(2, 0));
    }

    #[test]
    fn composition_with_identity() {
        let d = delta1();
        let id0 = Homomorphism::identity(d.source().clone()).unwrap();
        let id1 = Homomorphism::identity(d.target().clone()).unwrap();
        assert_eq!(compose_hom(&id1, &d).unwrap(), d);
        assert_eq!(compose_hom(&d, &id0).unwrap(), d);
        assert!(matches!(compose_hom(&d, &d), Err(HomError::Mismatch)));
    }

    #[test]
    fn omitted_bindings_are_identity() {
        let d = Homomorphism::new(
            Arc::new(blanchet::k0()),
            Arc::new(blanchet::k1()),
            vec![0],
            Substitution::new(),
        )
        .unwrap();
        assert_eq!(d.subst(), &blanchet::delta1().1);
        assert_eq!(
            d.subst().get(&Var::new("d", Sort::Data)),
            Some(&Term::var("d", Sort::Data))
        );
    }
}
