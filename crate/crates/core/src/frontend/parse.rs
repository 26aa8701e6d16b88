//! Surface syntax for protocols, skeletons, analyses, goals and formulas.

use std::sync::Arc;

use crate::algebra::{Sort, Substitution, Term, Var, VariableSet};
use crate::homomorphism::Homomorphism;
use crate::logic::{Atom, Conjunction, Goal, ShapeAnalysis};
use crate::skeleton::{Event, Instance, Node, Protocol, Role, Skeleton, Trace};

use super::sexpr::{read_all, Diagnostic, Pos, SExpr};

/// A conjunction over a protocol, as used by the `sat` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub protocol: String,
    pub conjunction: Conjunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    Protocol(Arc<Protocol>),
    Skeleton(Arc<Skeleton>),
    Analysis(ShapeAnalysis),
    Goal(Goal),
    Formula(Formula),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceUnit {
    pub forms: Vec<(Pos, Form)>,
}

impl SourceUnit {
    pub fn protocols(&self) -> impl Iterator<Item = &Arc<Protocol>> {
        self.forms.iter().filter_map(|(_, f)| match f {
            Form::Protocol(p) => Some(p),
            _ => None,
        })
    }

    pub fn skeletons(&self) -> impl Iterator<Item = &Arc<Skeleton>> {
        self.forms.iter().filter_map(|(_, f)| match f {
            Form::Skeleton(k) => Some(k),
            _ => None,
        })
    }

    pub fn analyses(&self) -> impl Iterator<Item = &ShapeAnalysis> {
        self.forms.iter().filter_map(|(_, f)| match f {
            Form::Analysis(a) => Some(a),
            _ => None,
        })
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.forms.iter().filter_map(|(_, f)| match f {
            Form::Goal(g) => Some(g),
            _ => None,
        })
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.forms.iter().filter_map(|(_, f)| match f {
            Form::Formula(c) => Some(c),
            _ => None,
        })
    }
}

type PResult<T> = Result<T, Diagnostic>;

fn fail<T>(e: &SExpr, message: impl Into<String>) -> PResult<T> {
    Err(Diagnostic::new(e.pos(), message))
}

fn list<'a>(e: &'a SExpr, what: &str) -> PResult<&'a [SExpr]> {
    match e.as_list() {
        Some(items) => Ok(items),
        None => fail(e, format!("expected {what}, found {e}")),
    }
}

fn symbol<'a>(e: &'a SExpr, what: &str) -> PResult<&'a str> {
    match e.as_atom() {
        Some(s) => Ok(s),
        None => fail(e, format!("expected {what}, found {e}")),
    }
}

/// The arguments of `(keyword args...)`.
fn clause<'a>(e: &'a SExpr, keyword: &str) -> PResult<&'a [SExpr]> {
    let items = list(e, &format!("({keyword} ...)"))?;
    match items.first().and_then(SExpr::as_atom) {
        Some(k) if k == keyword => Ok(&items[1..]),
        _ => fail(e, format!("expected ({keyword} ...), found {e}")),
    }
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn number(e: &SExpr) -> PResult<usize> {
    let s = symbol(e, "a number")?;
    if !is_numeral(s) {
        return fail(e, format!("expected a number, found {s}"));
    }
    s.parse()
        .or_else(|_| fail(e, format!("number {s} is too large")))
}

fn arity(e: &SExpr, args: &[SExpr], n: usize) -> PResult<()> {
    if args.len() != n {
        return fail(e, format!("expected {n} argument(s) in {e}"));
    }
    Ok(())
}

/// `(name... sort)` groups, appended to `vars`.
fn declarations(groups: &[SExpr], allow_strd: bool, vars: &mut VariableSet) -> PResult<()> {
    for g in groups {
        let items = list(g, "a declaration (name... sort)")?;
        let Some((sort_expr, names)) = items.split_last().filter(|(_, n)| !n.is_empty()) else {
            return fail(g, "a declaration needs at least one name and a sort");
        };
        let sort_name = symbol(sort_expr, "a sort")?;
        let sort = match Sort::from_name(sort_name) {
            Some(Sort::Nat) if !allow_strd => {
                return fail(sort_expr, "sort strd is only allowed in formulas")
            }
            Some(s) => s,
            None => return fail(sort_expr, format!("unknown sort {sort_name}")),
        };
        for n in names {
            let name = symbol(n, "a variable name")?;
            if is_numeral(name) {
                return fail(n, format!("{name} cannot be a variable name"));
            }
            if let Err(e) = vars.declare(name, sort) {
                return fail(n, e.to_string());
            }
        }
    }
    Ok(())
}

/// A term over `scope`; numerals are strand literals, allowed only when
/// `allow_nat` is set.
fn term(e: &SExpr, scope: &dyn Fn(&str) -> Option<Var>, allow_nat: bool) -> PResult<Term> {
    let t = match e {
        SExpr::Atom { text, .. } => {
            if is_numeral(text) {
                if !allow_nat {
                    return fail(e, format!("numeral {text} is not a message"));
                }
                return match text.parse() {
                    Ok(n) => Ok(Term::Nat(n)),
                    Err(_) => fail(e, format!("number {text} is too large")),
                };
            }
            match scope(text) {
                Some(v) => Term::Var(v),
                None => return fail(e, format!("undeclared variable {text}")),
            }
        }
        SExpr::List { items, .. } => {
            let head = items.first().and_then(SExpr::as_atom);
            let args = items.get(1..).unwrap_or(&[]);
            let sub = |a: &SExpr| term(a, scope, false);
            match head {
                Some("cat") if args.len() >= 2 => {
                    Term::tuple(args.iter().map(sub).collect::<PResult<_>>()?)
                        .expect("at least two items")
                }
                Some("enc") if args.len() >= 2 => {
                    let (key, body) = args.split_last().expect("at least two items");
                    let body = Term::tuple(body.iter().map(sub).collect::<PResult<_>>()?)
                        .expect("at least one item");
                    Term::enc(body, sub(key)?)
                }
                Some("invk") if args.len() == 1 => Term::invk(sub(&args[0])?),
                Some(h @ ("cat" | "enc" | "invk")) => {
                    return fail(e, format!("wrong number of arguments to {h}"))
                }
                _ => return fail(e, format!("unknown term {e}")),
            }
        }
    };
    match t.canonicalize() {
        Ok(c) => Ok(c),
        Err(err) => fail(e, err.to_string()),
    }
}

fn message(e: &SExpr, vars: &VariableSet) -> PResult<Term> {
    let t = term(e, &|n| vars.get(n), false)?;
    if !t.sort().is_message() {
        return fail(e, format!("{t} is not a message"));
    }
    Ok(t)
}

struct Parser {
    protocols: Vec<Arc<Protocol>>,
}

impl Parser {
    fn protocol(&self, e: &SExpr) -> PResult<Arc<Protocol>> {
        let name = symbol(e, "a protocol name")?;
        match self.protocols.iter().rev().find(|p| p.name == name) {
            Some(p) => Ok(p.clone()),
            None => fail(
                e,
                format!("unknown protocol {name} (protocols must be defined before use)"),
            ),
        }
    }

    fn form(&mut self, e: &SExpr) -> PResult<Form> {
        let items = list(e, "a top-level form")?;
        let args = items.get(1..).unwrap_or(&[]);
        match e.head() {
            Some("defprotocol") => {
                let p = Arc::new(self.defprotocol(e, args)?);
                self.protocols.push(p.clone());
                Ok(Form::Protocol(p))
            }
            Some("defskeleton") => Ok(Form::Skeleton(Arc::new(self.skeleton(e, args, None)?))),
            Some("defanalysis") => Ok(Form::Analysis(self.defanalysis(e, args)?)),
            Some("defgoal") => Ok(Form::Goal(self.defgoal(e, args)?)),
            Some("defformula") => Ok(Form::Formula(self.defformula(e, args)?)),
            _ => fail(e, format!("unknown top-level form {}", head_text(e))),
        }
    }

    fn defprotocol(&self, e: &SExpr, args: &[SExpr]) -> PResult<Protocol> {
        let Some((name, roles)) = args.split_first() else {
            return fail(e, "defprotocol needs a name");
        };
        let name = symbol(name, "a protocol name")?;
        let roles = roles.iter().map(defrole).collect::<PResult<Vec<_>>>()?;
        if roles.is_empty() {
            return fail(e, format!("protocol {name} has no roles"));
        }
        Protocol::new(name, roles).or_else(|err| fail(e, err.to_string()))
    }

    /// The body of `defskeleton` or of a `pov`/`shape` clause. A `maps`
    /// clause is returned, not interpreted, when `maps` is given.
    fn skeleton<'a>(
        &self,
        e: &SExpr,
        args: &'a [SExpr],
        mut maps: Option<&mut Option<&'a SExpr>>,
    ) -> PResult<Skeleton> {
        let Some((proto, clauses)) = args.split_first() else {
            return fail(e, "skeleton needs a protocol name");
        };
        let protocol = self.protocol(proto)?;
        let mut vars = VariableSet::new();
        for c in clauses {
            if c.head() == Some("vars") {
                declarations(clause(c, "vars")?, false, &mut vars)?;
            }
        }
        let mut instances = Vec::new();
        let mut orderings = Vec::new();
        let (mut non, mut uniq) = (Vec::new(), Vec::new());
        for c in clauses {
            match c.head() {
                Some("vars") => {}
                Some("defstrand") => instances.push(defstrand(c, &protocol, &vars)?),
                Some("precedes") => {
                    for pair in clause(c, "precedes")? {
                        let nodes = list(pair, "a pair of nodes")?;
                        arity(pair, nodes, 2)?;
                        orderings.push((node(&nodes[0])?, node(&nodes[1])?));
                    }
                }
                Some("non-orig") => {
                    for t in clause(c, "non-orig")? {
                        non.push(message(t, &vars)?);
                    }
                }
                Some("uniq-orig") => {
                    for t in clause(c, "uniq-orig")? {
                        uniq.push(message(t, &vars)?);
                    }
                }
                Some("maps") if maps.is_some() => {
                    let slot = maps.as_mut().expect("checked");
                    if slot.is_some() {
                        return fail(c, "duplicate maps clause");
                    }
                    **slot = Some(c);
                }
                _ => return fail(c, format!("unknown skeleton clause {}", head_text(c))),
            }
        }
        if instances.is_empty() {
            return fail(e, "skeleton has no strands");
        }
        let k = Skeleton::new(protocol, vars, instances, orderings, non, uniq)
            .or_else(|err| fail(e, err.to_string()))?;
        let report = k.check_wellformed();
        if !report.is_ok() {
            let lines: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            return fail(
                e,
                format!("skeleton is not well-formed: {}", lines.join("; ")),
            );
        }
        Ok(k)
    }

    fn defanalysis(&self, e: &SExpr, args: &[SExpr]) -> PResult<ShapeAnalysis> {
        let Some((pov_expr, shapes)) = args.split_first() else {
            return fail(e, "defanalysis needs a pov clause");
        };
        let pov = Arc::new(self.skeleton(pov_expr, clause(pov_expr, "pov")?, None)?);
        let mut homs = Vec::new();
        for s in shapes {
            let mut maps = None;
            let target = self.skeleton(s, clause(s, "shape")?, Some(&mut maps))?;
            let Some(maps) = maps else {
                return fail(s, "shape needs a maps clause");
            };
            homs.push(hom(maps, &pov, Arc::new(target))?);
        }
        ShapeAnalysis::new(pov, homs).or_else(|err| fail(e, err.to_string()))
    }

    fn defgoal(&self, e: &SExpr, args: &[SExpr]) -> PResult<Goal> {
        arity(e, args, 2)?;
        let protocol = self.protocol(&args[0])?;
        let forall = clause(&args[1], "forall")?;
        arity(&args[1], forall, 2)?;
        let mut universal = VariableSet::new();
        declarations(
            list(&forall[0], "a declaration list")?,
            true,
            &mut universal,
        )?;
        let implies = clause(&forall[1], "implies")?;
        arity(&forall[1], implies, 2)?;
        let hypothesis = Conjunction::new(
            universal.clone(),
            conjunction(&implies[0], &protocol, &universal, &VariableSet::new())?,
        );
        let conclusion = disjunction(&implies[1], &protocol, &universal)?;
        let g = Goal {
            protocol: protocol.name.clone(),
            hypothesis,
            conclusion,
        };
        g.check(&protocol).or_else(|err| fail(e, err.to_string()))?;
        Ok(g)
    }

    fn defformula(&self, e: &SExpr, args: &[SExpr]) -> PResult<Formula> {
        arity(e, args, 3)?;
        let protocol = self.protocol(&args[0])?;
        let mut vars = VariableSet::new();
        declarations(list(&args[1], "a declaration list")?, true, &mut vars)?;
        let atoms = conjunction(&args[2], &protocol, &vars, &VariableSet::new())?;
        Ok(Formula {
            protocol: protocol.name.clone(),
            conjunction: Conjunction::new(vars, atoms),
        })
    }
}

fn head_text(e: &SExpr) -> String {
    match e.as_list().and_then(|l| l.first()) {
        Some(h) => h.to_string(),
        None => e.to_string(),
    }
}

fn defrole(e: &SExpr) -> PResult<Role> {
    let args = clause(e, "defrole")?;
    let Some((name, clauses)) = args.split_first() else {
        return fail(e, "defrole needs a name");
    };
    let name = symbol(name, "a role name")?;
    let mut vars = VariableSet::new();
    let mut trace = None;
    for c in clauses {
        match c.head() {
            Some("vars") => declarations(clause(c, "vars")?, false, &mut vars)?,
            Some("trace") => {
                if trace.is_some() {
                    return fail(c, "duplicate trace");
                }
                trace = Some(c);
            }
            _ => return fail(c, format!("unknown role clause {}", head_text(c))),
        }
    }
    let Some(trace_expr) = trace else {
        return fail(e, format!("role {name} has no trace"));
    };
    let mut events = Vec::new();
    for ev in clause(trace_expr, "trace")? {
        let items = list(ev, "(send t) or (recv t)")?;
        arity(ev, items, 2)?;
        let msg = message(&items[1], &vars)?;
        events.push(match ev.head() {
            Some("send") => Event::send(msg),
            Some("recv") => Event::recv(msg),
            _ => {
                return fail(
                    ev,
                    format!("expected send or recv, found {}", head_text(ev)),
                )
            }
        });
    }
    let trace = Trace::new(events).or_else(|err| fail(trace_expr, err.to_string()))?;
    Role::new(name, vars, trace).or_else(|err| fail(e, err.to_string()))
}

fn defstrand(e: &SExpr, protocol: &Protocol, vars: &VariableSet) -> PResult<Instance> {
    let args = clause(e, "defstrand")?;
    if args.len() < 2 {
        return fail(e, "defstrand needs a role and a height");
    }
    let role_name = symbol(&args[0], "a role name")?;
    let Some(role) = protocol.role(role_name) else {
        return fail(
            &args[0],
            format!("role {role_name} is not part of protocol {}", protocol.name),
        );
    };
    let height = number(&args[1])?;
    let mut subst = Substitution::new();
    for b in &args[2..] {
        let pair = list(b, "a binding (rolevar term)")?;
        arity(b, pair, 2)?;
        let x_name = symbol(&pair[0], "a role variable")?;
        let Some(x) = role.vars.get(x_name) else {
            return fail(
                &pair[0],
                format!("{x_name} is not a variable of role {role_name}"),
            );
        };
        let t = message(&pair[1], vars)?;
        if let Err(err) = subst.bind(x, t) {
            return fail(b, err.to_string());
        }
    }
    Instance::new(role.clone(), height, subst).or_else(|err| fail(e, err.to_string()))
}

fn node(e: &SExpr) -> PResult<Node> {
    let items = list(e, "a node (strand index)")?;
    arity(e, items, 2)?;
    Ok(Node::new(number(&items[0])?, number(&items[1])?))
}

fn hom(maps: &SExpr, pov: &Arc<Skeleton>, target: Arc<Skeleton>) -> PResult<Homomorphism> {
    let args = clause(maps, "maps")?;
    arity(maps, args, 2)?;
    let strand_map = list(&args[0], "a strand list")?
        .iter()
        .map(number)
        .collect::<PResult<Vec<_>>>()?;
    let mut subst = Substitution::new();
    for b in list(&args[1], "a substitution")? {
        let pair = list(b, "a binding (var term)")?;
        arity(b, pair, 2)?;
        let name = symbol(&pair[0], "a variable")?;
        let Some(x) = pov.vars().get(name) else {
            return fail(
                &pair[0],
                format!("{name} is not a variable of the pov skeleton"),
            );
        };
        let t = message(&pair[1], target.vars())?;
        if let Err(err) = subst.bind(x, t) {
            return fail(b, err.to_string());
        }
    }
    Homomorphism::new(pov.clone(), target, strand_map, subst)
        .or_else(|err| fail(maps, err.to_string()))
}

/// `(and atom...)` or a single atom.
fn conjunction(
    e: &SExpr,
    protocol: &Protocol,
    outer: &VariableSet,
    inner: &VariableSet,
) -> PResult<Vec<Atom>> {
    let exprs = if e.head() == Some("and") {
        clause(e, "and")?
    } else {
        std::slice::from_ref(e)
    };
    exprs
        .iter()
        .map(|a| atom(a, protocol, outer, inner))
        .collect()
}

/// `(or (exists (decls) body)...)`, a single `exists`, or `(false)`.
fn disjunction(
    e: &SExpr,
    protocol: &Protocol,
    universal: &VariableSet,
) -> PResult<Vec<Conjunction>> {
    let disjuncts = match e.head() {
        Some("false") => {
            arity(e, clause(e, "false")?, 0)?;
            return Ok(Vec::new());
        }
        Some("or") => clause(e, "or")?,
        _ => std::slice::from_ref(e),
    };
    let mut out = Vec::new();
    for d in disjuncts {
        let args = clause(d, "exists")?;
        arity(d, args, 2)?;
        let mut vars = VariableSet::new();
        declarations(list(&args[0], "a declaration list")?, true, &mut vars)?;
        if let Some(v) = vars.iter().find(|v| universal.contains_name(&v.name)) {
            return fail(
                &args[0],
                format!("{} shadows a universally quantified variable", v.name),
            );
        }
        let atoms = conjunction(&args[1], protocol, universal, &vars)?;
        out.push(Conjunction::new(vars, atoms));
    }
    Ok(out)
}

fn atom(e: &SExpr, protocol: &Protocol, outer: &VariableSet, inner: &VariableSet) -> PResult<Atom> {
    let scope = |n: &str| inner.get(n).or_else(|| outer.get(n));
    let items = list(e, "an atomic formula")?;
    let args = items.get(1..).unwrap_or(&[]);
    let t = |a: &SExpr| term(a, &scope, true);
    let a = match e.head() {
        Some("p") => {
            arity(e, args, 5)?;
            let role_name = symbol(&args[0], "a role name")?;
            let Some(role) = protocol.role(role_name) else {
                return fail(
                    &args[0],
                    format!("role {role_name} is not part of protocol {}", protocol.name),
                );
            };
            let x_name = symbol(&args[2], "a role variable")?;
            let Some(var) = role.vars.get(x_name) else {
                return fail(
                    &args[2],
                    format!("{x_name} is not a variable of role {role_name}"),
                );
            };
            Atom::Progress {
                role: role_name.to_string(),
                height: number(&args[1])?,
                var,
                strand: t(&args[3])?,
                msg: t(&args[4])?,
            }
        }
        Some("prec") => {
            arity(e, args, 4)?;
            Atom::Prec {
                strand: t(&args[0])?,
                index: number(&args[1])?,
                later_strand: t(&args[2])?,
                later_index: number(&args[3])?,
            }
        }
        Some("non") => {
            arity(e, args, 1)?;
            Atom::Non(t(&args[0])?)
        }
        Some("uniq") => {
            arity(e, args, 1)?;
            Atom::Uniq(t(&args[0])?)
        }
        Some("orig") => {
            arity(e, args, 3)?;
            Atom::Orig {
                term: t(&args[0])?,
                strand: t(&args[1])?,
                index: number(&args[2])?,
            }
        }
        Some("=") => {
            arity(e, args, 2)?;
            Atom::Eq(t(&args[0])?, t(&args[1])?)
        }
        Some("false") => {
            arity(e, args, 0)?;
            Atom::False
        }
        _ => return fail(e, format!("unknown predicate {}", head_text(e))),
    };
    a.check(protocol).or_else(|err| fail(e, err.to_string()))?;
    Ok(a)
}

/// Parses a whole unit.
pub fn parse(text: &str) -> Result<SourceUnit, Diagnostic> {
    parse_with(text, &[])
}

/// Parses a unit that may refer to protocols defined elsewhere.
pub fn parse_with(text: &str, known: &[Arc<Protocol>]) -> Result<SourceUnit, Diagnostic> {
    let mut parser = Parser {
        protocols: known.to_vec(),
    };
    let mut unit = SourceUnit::default();
    let mut defined: Vec<String> = Vec::new();
    for e in read_all(text)? {
        let form = parser.form(&e)?;
        if let Form::Protocol(p) = &form {
            if defined.contains(&p.name) {
                return fail(&e, format!("protocol {} is already defined", p.name));
            }
            defined.push(p.name.clone());
        }
        unit.forms.push((e.pos(), form));
    }
    Ok(unit)
}

/// A single message term over `vars`.
pub fn parse_term(text: &str, vars: &VariableSet) -> Result<Term, Diagnostic> {
    let es = read_all(text)?;
    match es.as_slice() {
        [e] => message(e, vars),
        _ => Err(Diagnostic::new(
            es.get(1).map(SExpr::pos).unwrap_or(Pos { line: 1, col: 1 }),
            "expected exactly one term",
        )),
    }
}
