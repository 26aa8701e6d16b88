//! Strand spaces, protocols and skeletons.
//!
//! A skeleton is given by a sequence of role instances, a set of stored
//! inter-strand orderings, and the non-origination and unique-origination
//! assumptions. Strand succession is always part of the effective order and
//! is never stored.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

use crate::algebra::{match_sequence, AlgebraError, Sort, Substitution, Term, Var, VariableSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Send,
    Recv,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Send => "send",
            Direction::Recv => "recv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub dir: Direction,
    pub msg: Term,
}

impl Event {
    pub fn send(msg: Term) -> Event {
        Event {
            dir: Direction::Send,
            msg,
        }
    }

    pub fn recv(msg: Term) -> Event {
        Event {
            dir: Direction::Recv,
            msg,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dir {
            Direction::Send => write!(f, "+{}", self.msg),
            Direction::Recv => write!(f, "-{}", self.msg),
        }
    }
}

/// A non-empty sequence of events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    events: Vec<Event>,
}

impl Trace {
    pub fn new(events: Vec<Event>) -> Result<Trace, SkeletonError> {
        if events.is_empty() {
            return Err(SkeletonError::EmptyTrace);
        }
        for e in &events {
            let sort = e.msg.check_sort()?;
            if !sort.is_message() {
                return Err(SkeletonError::Algebra(AlgebraError::Sort(format!(
                    "event message {} is not a message",
                    e.msg
                ))));
            }
        }
        Ok(Trace {
            events: events
                .into_iter()
                .map(|e| Event {
                    dir: e.dir,
                    msg: e.msg.canon(),
                })
                .collect(),
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prefix(&self, h: usize) -> &[Event] {
        &self.events[..h.min(self.events.len())]
    }

    /// Index of the origination event of `t`: the first event carrying it,
    /// provided that event is a transmission.
    pub fn originates(&self, t: &Term) -> Option<usize> {
        let (i, e) = self
            .events
            .iter()
            .enumerate()
            .find(|(_, e)| t.carried_by(&e.msg))?;
        (e.dir == Direction::Send).then_some(i)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub vars: VariableSet,
    trace: Trace,
}

impl Role {
    pub fn new(
        name: impl Into<String>,
        vars: VariableSet,
        trace: Trace,
    ) -> Result<Role, SkeletonError> {
        let name = name.into();
        for e in trace.events() {
            for v in e.msg.vars() {
                if !vars.contains(&v) {
                    return Err(SkeletonError::UndeclaredVar(v.name));
                }
            }
        }
        if let Some(v) = vars.iter().find(|v| !v.sort.is_message()) {
            return Err(SkeletonError::Algebra(AlgebraError::Sort(format!(
                "role variable {} cannot have sort {}",
                v.name, v.sort
            ))));
        }
        Ok(Role { name, vars, trace })
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Role variables occurring in the length-`h` prefix, in declaration order.
    pub fn prefix_vars(&self, h: usize) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        for e in self.trace.prefix(h) {
            e.msg.collect_vars(&mut seen);
        }
        self.vars.iter().filter(|v| seen.contains(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    pub name: String,
    roles: Vec<Arc<Role>>,
}

impl Protocol {
    pub fn new(name: impl Into<String>, roles: Vec<Role>) -> Result<Protocol, SkeletonError> {
        let mut names = BTreeSet::new();
        for r in &roles {
            if !names.insert(r.name.clone()) {
                return Err(SkeletonError::DuplicateRole(r.name.clone()));
            }
        }
        Ok(Protocol {
            name: name.into(),
            roles: roles.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn roles(&self) -> &[Arc<Role>] {
        &self.roles
    }

    pub fn role(&self, name: &str) -> Option<&Arc<Role>> {
        self.roles.iter().find(|r| r.name == name)
    }
}

/// `i(r, h, σ)`: the first `h` events of role `r` instantiated by `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub role: Arc<Role>,
    pub height: usize,
    pub subst: Substitution,
}

impl Instance {
    /// The substitution must bind exactly the role variables that occur in
    /// the instantiated prefix.
    pub fn new(
        role: Arc<Role>,
        height: usize,
        subst: Substitution,
    ) -> Result<Instance, SkeletonError> {
        if height == 0 || height > role.len() {
            return Err(SkeletonError::HeightOutOfRange {
                role: role.name.clone(),
                height,
                len: role.len(),
            });
        }
        let prefix_vars = role.prefix_vars(height);
        for v in subst.domain() {
            if !prefix_vars.contains(v) {
                return Err(SkeletonError::ForeignRoleVar {
                    role: role.name.clone(),
                    var: v.name.clone(),
                });
            }
        }
        if let Some(v) = prefix_vars.iter().find(|v| !subst.contains(v)) {
            return Err(SkeletonError::UnboundRoleVar {
                role: role.name.clone(),
                var: v.name.clone(),
            });
        }
        Ok(Instance {
            role,
            height,
            subst,
        })
    }

    pub fn trace(&self) -> Trace {
        Trace {
            events: self
                .role
                .trace()
                .prefix(self.height)
                .iter()
                .map(|e| Event {
                    dir: e.dir,
                    msg: self.subst.apply(&e.msg),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub strand: usize,
    pub index: usize,
}

impl Node {
    pub fn new(strand: usize, index: usize) -> Node {
        Node { strand, index }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.strand, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkeletonError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("skeleton has no strands")]
    NoStrands,
    #[error("duplicate role {0}")]
    DuplicateRole(String),
    #[error("role {role} is not part of protocol {protocol}")]
    UnknownRole { protocol: String, role: String },
    #[error("height {height} out of range for role {role} of length {len}")]
    HeightOutOfRange {
        role: String,
        height: usize,
        len: usize,
    },
    #[error("role variable {var} of {role} is not bound by the instance")]
    UnboundRoleVar { role: String, var: String },
    #[error("{var} does not occur in the instantiated prefix of role {role}")]
    ForeignRoleVar { role: String, var: String },
    #[error("undeclared variable {0}")]
    UndeclaredVar(String),
    #[error("node {0} is not a node of the skeleton")]
    BadNode(Node),
    #[error("stored ordering {0} -> {1} is within one strand")]
    IntraStrandOrdering(Node, Node),
    #[error("node ordering has a cycle through {0}")]
    Cycle(Node),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One violated clause of the skeleton definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle {
        node: Node,
    },
    NotAnAtom {
        term: Term,
    },
    NonOrigOriginates {
        term: Term,
        node: Node,
    },
    UniqOrigMultiple {
        term: Term,
        nodes: Vec<Node>,
    },
    UniqOrigUnordered {
        term: Term,
        origin: Node,
        node: Node,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { node } => write!(f, "node ordering has a cycle through {node}"),
            Violation::NotAnAtom { term } => write!(f, "assumption {term} is not an atom"),
            Violation::NonOrigOriginates { term, node } => {
                write!(f, "non-originating {term} originates at {node}")
            }
            Violation::UniqOrigMultiple { term, nodes } => {
                write!(f, "uniquely originating {term} originates at")?;
                for n in nodes {
                    write!(f, " {n}")?;
                }
                Ok(())
            }
            Violation::UniqOrigUnordered { term, origin, node } => write!(
                f,
                "{node} carries uniquely originating {term} but is not after its origin {origin}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormedReport {
    pub violations: Vec<Violation>,
}

impl WellFormedReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    protocol: Arc<Protocol>,
    vars: VariableSet,
    instances: Vec<Instance>,
    orderings: IndexSet<(Node, Node)>,
    non_orig: IndexSet<Term>,
    uniq_orig: IndexSet<Term>,
    traces: Vec<Trace>,
    order: Closure,
}

impl Skeleton {
    pub fn new(
        protocol: Arc<Protocol>,
        vars: VariableSet,
        instances: Vec<Instance>,
        orderings: impl IntoIterator<Item = (Node, Node)>,
        non_orig: impl IntoIterator<Item = Term>,
        uniq_orig: impl IntoIterator<Item = Term>,
    ) -> Result<Skeleton, SkeletonError> {
        if instances.is_empty() {
            return Err(SkeletonError::NoStrands);
        }
        for inst in &instances {
            if protocol
                .role(&inst.role.name)
                .map(|r| **r != *inst.role)
                .unwrap_or(true)
            {
                return Err(SkeletonError::UnknownRole {
                    protocol: protocol.name.clone(),
                    role: inst.role.name.clone(),
                });
            }
            for (_, t) in inst.subst.iter() {
                check_term_vars(t, &vars)?;
            }
        }
        let traces: Vec<Trace> = instances.iter().map(Instance::trace).collect();
        let orderings: IndexSet<(Node, Node)> = orderings.into_iter().collect();
        for &(a, b) in &orderings {
            for n in [a, b] {
                if n.strand >= traces.len() || n.index >= traces[n.strand].len() {
                    return Err(SkeletonError::BadNode(n));
                }
            }
            if a.strand == b.strand {
                return Err(SkeletonError::IntraStrandOrdering(a, b));
            }
        }
        let canon_all = |ts: Vec<Term>| -> Result<IndexSet<Term>, SkeletonError> {
            ts.into_iter()
                .map(|t| {
                    let c = t.canonicalize()?;
                    check_term_vars(&c, &vars)?;
                    Ok(c)
                })
                .collect()
        };
        let non_orig = canon_all(non_orig.into_iter().collect())?;
        let uniq_orig = canon_all(uniq_orig.into_iter().collect())?;
        let order = Closure::compute(&traces, &orderings);
        Ok(Skeleton {
            protocol,
            vars,
            instances,
            orderings,
            non_orig,
            uniq_orig,
            traces,
            order,
        })
    }

    pub fn protocol(&self) -> &Arc<Protocol> {
        &self.protocol
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn orderings(&self) -> &IndexSet<(Node, Node)> {
        &self.orderings
    }

    pub fn non_orig(&self) -> &IndexSet<Term> {
        &self.non_orig
    }

    pub fn uniq_orig(&self) -> &IndexSet<Term> {
        &self.uniq_orig
    }

    pub fn strand_count(&self) -> usize {
        self.traces.len()
    }

    pub fn trace(&self, strand: usize) -> &Trace {
        &self.traces[strand]
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn event(&self, n: Node) -> Option<&Event> {
        self.traces.get(n.strand)?.events().get(n.index)
    }

    pub fn is_node(&self, n: Node) -> bool {
        self.event(n).is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.traces
            .iter()
            .enumerate()
            .flat_map(|(s, tr)| (0..tr.len()).map(move |i| Node::new(s, i)))
    }

    /// `a ≺ b` in the effective order. Meaningless for cyclic skeletons.
    pub fn precedes(&self, a: Node, b: Node) -> bool {
        self.order.reaches(&self.traces, a, b)
    }

    /// Transitive closure of stored orderings and strand succession.
    pub fn effective_order(&self) -> Result<BTreeSet<(Node, Node)>, SkeletonError> {
        if let Some(n) = self.order.cycle_node(&self.traces) {
            return Err(SkeletonError::Cycle(n));
        }
        let nodes: Vec<Node> = self.nodes().collect();
        let mut out = BTreeSet::new();
        for &a in &nodes {
            for &b in &nodes {
                if self.precedes(a, b) {
                    out.insert((a, b));
                }
            }
        }
        Ok(out)
    }

    /// `O_k(t)`: the nodes at which `t` originates.
    pub fn origination_nodes(&self, t: &Term) -> Vec<Node> {
        self.traces
            .iter()
            .enumerate()
            .filter_map(|(s, tr)| tr.originates(t).map(|i| Node::new(s, i)))
            .collect()
    }

    pub fn check_wellformed(&self) -> WellFormedReport {
        let mut violations = Vec::new();
        let cyclic = self.order.cycle_node(&self.traces);
        if let Some(node) = cyclic {
            violations.push(Violation::Cycle { node });
        }
        for t in self.non_orig.iter().chain(self.uniq_orig.iter()) {
            if !t.sort().is_atomic() {
                violations.push(Violation::NotAnAtom { term: t.clone() });
            }
        }
        for t in &self.non_orig {
            for node in self.origination_nodes(t) {
                violations.push(Violation::NonOrigOriginates {
                    term: t.clone(),
                    node,
                });
            }
        }
        for t in &self.uniq_orig {
            let origins = self.origination_nodes(t);
            match origins.as_slice() {
                [] => {}
                [origin] if cyclic.is_none() => {
                    for node in self.nodes() {
                        if node != *origin
                            && t.carried_by(&self.event(node).unwrap().msg)
                            && !self.precedes(*origin, node)
                        {
                            violations.push(Violation::UniqOrigUnordered {
                                term: t.clone(),
                                origin: *origin,
                                node,
                            });
                        }
                    }
                }
                [_] => {}
                _ => violations.push(Violation::UniqOrigMultiple {
                    term: t.clone(),
                    nodes: origins,
                }),
            }
        }
        WellFormedReport { violations }
    }
}

fn check_term_vars(t: &Term, vars: &VariableSet) -> Result<(), SkeletonError> {
    for v in t.vars() {
        if !vars.contains(&v) {
            return Err(SkeletonError::UndeclaredVar(v.name));
        }
    }
    if t.check_sort()? == Sort::Nat {
        return Err(SkeletonError::Algebra(AlgebraError::Sort(format!(
            "{t} is not a message"
        ))));
    }
    Ok(())
}

/// Whether `tr` is an elaboration of `role`: every substitution mapping the
/// role prefix of the same length onto `tr`, directions included.
pub fn elaboration_check(tr: &Trace, role: &Role) -> Vec<Substitution> {
    if tr.len() > role.len() {
        return Vec::new();
    }
    let prefix = role.trace().prefix(tr.len());
    if prefix.iter().zip(tr.events()).any(|(p, e)| p.dir != e.dir) {
        return Vec::new();
    }
    match_sequence(
        prefix
            .iter()
            .map(|e| &e.msg)
            .zip(tr.events().iter().map(|e| &e.msg)),
        &Substitution::new(),
    )
    .into_iter()
    .collect()
}

/// Reachability over nodes via paths of length at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Closure {
    offsets: Vec<usize>,
    reach: Vec<Vec<bool>>,
}

impl Closure {
    fn compute(traces: &[Trace], orderings: &IndexSet<(Node, Node)>) -> Closure {
        let mut offsets = Vec::with_capacity(traces.len());
        let mut total = 0;
        for tr in traces {
            offsets.push(total);
            total += tr.len();
        }
        let idx = |n: Node| offsets[n.strand] + n.index;
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); total];
        for (s, tr) in traces.iter().enumerate() {
            for i in 1..tr.len() {
                succ[idx(Node::new(s, i - 1))].push(idx(Node::new(s, i)));
            }
        }
        for &(a, b) in orderings {
            succ[idx(a)].push(idx(b));
        }
        let mut reach = vec![vec![false; total]; total];
        for (start, row) in reach.iter_mut().enumerate() {
            let mut stack = succ[start].clone();
            while let Some(n) = stack.pop() {
                if !row[n] {
                    row[n] = true;
                    stack.extend_from_slice(&succ[n]);
                }
            }
        }
        Closure { offsets, reach }
    }

    fn index(&self, traces: &[Trace], n: Node) -> Option<usize> {
        let tr = traces.get(n.strand)?;
        (n.index < tr.len()).then(|| self.offsets[n.strand] + n.index)
    }

    fn reaches(&self, traces: &[Trace], a: Node, b: Node) -> bool {
        match (self.index(traces, a), self.index(traces, b)) {
            (Some(i), Some(j)) => self.reach[i][j],
            _ => false,
        }
    }

    fn cycle_node(&self, traces: &[Trace]) -> Option<Node> {
        for (s, tr) in traces.iter().enumerate() {
            for i in 0..tr.len() {
                let k = self.offsets[s] + i;
                if self.reach[k][k] {
                    return Some(Node::new(s, i));
                }
            }
        }
        None
    }
}
