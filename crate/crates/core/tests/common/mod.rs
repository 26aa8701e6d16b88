//! Seeded generators for protocols, skeletons, homomorphisms, analyses and
//! conjunctions, together with brute-force oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sas_core::algebra::{match_sequence, Sort, Substitution, Term, Var, VariableSet};
use sas_core::homomorphism::{verify, Homomorphism};
use sas_core::logic::{
    enumerate_assignments, homomorphism_from_assignment, mode_check, skeleton_formula, Atom,
    Conjunction, ShapeAnalysis,
};
use sas_core::skeleton::{Event, Instance, Node, Protocol, Role, Skeleton, Trace};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

fn v(name: &str, sort: Sort) -> Var {
    Var::new(name, sort)
}

fn key_leaf(rng: &mut Rand, keys: &[&Var], depth: usize) -> Term {
    let k = (*keys.choose(rng).unwrap()).clone();
    if depth >= 2 && k.sort == Sort::Akey && rng.gen_bool(0.25) {
        Term::inverse(Term::Var(k))
    } else {
        Term::Var(k)
    }
}

/// A canonical message of depth at most `depth` over `pool`.
pub fn term(rng: &mut Rand, pool: &[Var], depth: usize) -> Term {
    let keys: Vec<&Var> = pool.iter().filter(|v| v.sort.is_key()).collect();
    if depth <= 1 || rng.gen_bool(0.35) {
        let x = pool.choose(rng).unwrap();
        if x.sort.is_key() {
            return key_leaf(rng, &[x], depth);
        }
        return Term::Var(x.clone());
    }
    if keys.is_empty() || rng.gen_bool(0.45) {
        Term::pair(term(rng, pool, depth - 1), term(rng, pool, depth - 1))
    } else {
        Term::enc(term(rng, pool, depth - 1), key_leaf(rng, &keys, depth - 1))
    }
}

/// One or two roles over `a b: akey, s: skey, d: data` and, sometimes, a
/// message-sorted `x`; traces of length at most 3, terms of depth at most 3.
pub fn protocol(rng: &mut Rand) -> Arc<Protocol> {
    let full = [
        v("a", Sort::Akey),
        v("b", Sort::Akey),
        v("s", Sort::Skey),
        v("d", Sort::Data),
        v("x", Sort::Top),
    ];
    let n_roles = rng.gen_range(1..=2);
    let mut roles = Vec::new();
    for r in 0..n_roles {
        let pool = if rng.gen_bool(0.2) {
            &full[..]
        } else {
            &full[..4]
        };
        let len = rng.gen_range(1..=3);
        let events: Vec<Event> = (0..len)
            .map(|_| {
                let msg = term(rng, pool, 3);
                if rng.gen_bool(0.5) {
                    Event::send(msg)
                } else {
                    Event::recv(msg)
                }
            })
            .collect();
        let mut seen = BTreeSet::new();
        for e in &events {
            e.msg.collect_vars(&mut seen);
        }
        let vars: VariableSet = full.iter().filter(|x| seen.contains(*x)).cloned().collect();
        let trace = Trace::new(events).unwrap();
        roles.push(Role::new(format!("r{r}"), vars, trace).unwrap());
    }
    Arc::new(Protocol::new("gen", roles).unwrap())
}

fn skeleton_pool() -> Vec<Var> {
    vec![
        v("k1", Sort::Akey),
        v("k2", Sort::Akey),
        v("e1", Sort::Skey),
        v("e2", Sort::Skey),
        v("n1", Sort::Data),
        v("n2", Sort::Data),
        v("m1", Sort::Top),
    ]
}

fn value_for(rng: &mut Rand, sort: Sort, pool: &[Var]) -> Term {
    let of_sort: Vec<&Var> = pool.iter().filter(|x| x.sort == sort).collect();
    match sort {
        Sort::Top => {
            if rng.gen_bool(0.3) {
                Term::Var((*of_sort.choose(rng).unwrap()).clone())
            } else {
                let atoms: Vec<Var> = pool
                    .iter()
                    .filter(|x| x.sort != Sort::Top)
                    .cloned()
                    .collect();
                term(rng, &atoms, 2)
            }
        }
        _ => key_leaf(rng, &of_sort, if sort == Sort::Akey { 2 } else { 1 }),
    }
}

fn declared(terms: impl IntoIterator<Item = Term>) -> VariableSet {
    let mut seen = BTreeSet::new();
    for t in terms {
        t.collect_vars(&mut seen);
    }
    seen.into_iter().collect()
}

fn instance_terms(instances: &[Instance]) -> Vec<Term> {
    instances
        .iter()
        .flat_map(|i| i.subst.iter().map(|(_, t)| t.clone()).collect::<Vec<_>>())
        .collect()
}

fn all_atoms(k: &Skeleton) -> BTreeSet<Term> {
    k.traces()
        .iter()
        .flat_map(|tr| tr.events().iter().flat_map(|e| e.msg.atoms()))
        .collect()
}

/// Adds the edges a uniquely originating `t` needs, or returns false when
/// no edge set can make it well placed.
fn order_after_origin(k: &Skeleton, t: &Term, edges: &mut Vec<(Node, Node)>) -> bool {
    let origins = k.origination_nodes(t);
    match origins.as_slice() {
        [] => true,
        [o] => {
            for n in k.nodes() {
                if n.strand != o.strand && t.carried_by(&k.event(n).unwrap().msg) {
                    edges.push((*o, n));
                }
            }
            true
        }
        _ => false,
    }
}

/// A well-formed skeleton with at most three strands, or `None` when the
/// random choices could not be repaired into one.
pub fn skeleton(rng: &mut Rand, p: &Arc<Protocol>) -> Option<Skeleton> {
    let pool = skeleton_pool();
    let n = rng.gen_range(1..=3);
    let mut instances = Vec::new();
    for _ in 0..n {
        let role = p.roles().choose(rng).unwrap().clone();
        let height = rng.gen_range(1..=role.len());
        let mut subst = Substitution::new();
        for x in role.prefix_vars(height) {
            let t = value_for(rng, x.sort, &pool);
            subst.bind(x, t).unwrap();
        }
        instances.push(Instance::new(role, height, subst).unwrap());
    }
    let vars = declared(instance_terms(&instances));
    let bare = Skeleton::new(p.clone(), vars.clone(), instances.clone(), [], [], []).ok()?;

    let nodes: Vec<Node> = bare.nodes().collect();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let (a, b) = (*nodes.choose(rng).unwrap(), *nodes.choose(rng).unwrap());
        if a.strand != b.strand {
            edges.push((a, b));
        }
    }
    let mut non = Vec::new();
    let mut uniq = Vec::new();
    for t in all_atoms(&bare) {
        if rng.gen_bool(0.3) && bare.origination_nodes(&t).is_empty() {
            non.push(t);
        } else if rng.gen_bool(0.35) && order_after_origin(&bare, &t, &mut edges) {
            uniq.push(t);
        }
    }
    let k = Skeleton::new(p.clone(), vars, instances, edges, non, uniq).ok()?;
    k.check_wellformed().is_ok().then_some(k)
}

pub fn skeleton_retry(rng: &mut Rand, p: &Arc<Protocol>) -> Skeleton {
    loop {
        if let Some(k) = skeleton(rng, p) {
            return k;
        }
    }
}

fn rename(t: &Term) -> Term {
    let mut s = Substitution::new();
    for x in t.vars() {
        s.bind(x.clone(), Term::var(format!("g{}", x.name), x.sort))
            .unwrap();
    }
    s.apply(t)
}

/// A homomorphism into `k` from a generated source: some strands of `k`,
/// possibly repeated and truncated, with renamed variables, some role
/// bindings generalized to fresh variables, and a random part of the
/// order and assumptions pulled back.
pub fn derive(rng: &mut Rand, k: &Arc<Skeleton>) -> Option<Homomorphism> {
    let n0 = rng.gen_range(1..=3);
    let mut map = Vec::new();
    let mut instances = Vec::new();
    let mut sigma = Substitution::new();
    let mut fresh = 0;
    for _ in 0..n0 {
        let j = rng.gen_range(0..k.strand_count());
        let target = &k.instances()[j];
        let height = rng.gen_range(1..=target.height);
        let mut subst = Substitution::new();
        for x in target.role.prefix_vars(height) {
            let t = target.subst.get(&x).unwrap().clone();
            if rng.gen_bool(0.25) {
                let y = v(&format!("y{fresh}"), x.sort);
                fresh += 1;
                sigma.bind(y.clone(), t).unwrap();
                subst.bind(x, Term::Var(y)).unwrap();
            } else {
                for w in t.vars() {
                    sigma
                        .bind(v(&format!("g{}", w.name), w.sort), Term::Var(w))
                        .unwrap();
                }
                subst.bind(x, rename(&t)).unwrap();
            }
        }
        map.push(j);
        instances.push(Instance::new(target.role.clone(), height, subst).unwrap());
    }
    let vars = declared(instance_terms(&instances));
    let bare = Skeleton::new(
        k.protocol().clone(),
        vars.clone(),
        instances.clone(),
        [],
        [],
        [],
    )
    .ok()?;

    let image = |n: Node| Node::new(map[n.strand], n.index);
    let mut edges = Vec::new();
    for a in bare.nodes() {
        for b in bare.nodes() {
            if a.strand != b.strand && k.precedes(image(a), image(b)) && rng.gen_bool(0.4) {
                edges.push((a, b));
            }
        }
    }
    let mut non = Vec::new();
    let mut uniq = Vec::new();
    for t in all_atoms(&bare) {
        let st = sigma.apply(&t);
        if k.non_orig().contains(&st) && rng.gen_bool(0.6) {
            non.push(t);
        } else if k.uniq_orig().contains(&st) && rng.gen_bool(0.6) {
            uniq.push(t);
        }
    }
    let k0 = Skeleton::new(
        k.protocol().clone(),
        vars.clone(),
        instances,
        edges,
        non,
        uniq,
    )
    .ok()?;
    if !k0.check_wellformed().is_ok() {
        return None;
    }
    let sigma = sigma.restrict(vars.iter().collect::<Vec<_>>().iter());
    if !verify(&k0, k, &map, &sigma).is_ok() {
        return None;
    }
    Homomorphism::new(Arc::new(k0), k.clone(), map, sigma).ok()
}

pub fn derive_retry(rng: &mut Rand, k: &Arc<Skeleton>) -> Homomorphism {
    loop {
        if let Some(d) = derive(rng, k) {
            return d;
        }
    }
}

/// A protocol, a target skeleton and a homomorphism into it.
pub fn hom(rng: &mut Rand) -> Homomorphism {
    let p = protocol(rng);
    let k = Arc::new(skeleton_retry(rng, &p));
    derive_retry(rng, &k)
}

/// Every homomorphism `k0 ↦ k`, found from the assignments satisfying
/// `K(k0)`.
pub fn homs_via_formula(k0: &Arc<Skeleton>, k: &Arc<Skeleton>) -> Vec<Homomorphism> {
    let sf = skeleton_formula(k0);
    enumerate_assignments(k, &sf.formula, &Substitution::new())
        .unwrap()
        .iter()
        .map(|alpha| homomorphism_from_assignment(k0, k, &sf, alpha).unwrap())
        .collect()
}

/// A point of view with shapes closed under homomorphisms: for each
/// target, every homomorphism from the point of view appears as a shape.
pub fn closed_analysis(rng: &mut Rand) -> ShapeAnalysis {
    let p = protocol(rng);
    let k1 = Arc::new(skeleton_retry(rng, &p));
    let d = derive_retry(rng, &k1);
    let k0 = d.source().clone();
    let mut targets = vec![k1];
    for _ in 0..rng.gen_range(0..=2) {
        targets.push(Arc::new(skeleton_retry(rng, &p)));
    }
    let shapes: Vec<Homomorphism> = targets
        .iter()
        .flat_map(|k| homs_via_formula(&k0, k))
        .collect();
    ShapeAnalysis::new(k0, shapes).unwrap()
}

/// Every `(φ, σ)` from `k0` to `k` passing `verify`, by trying every strand
/// map and matching traces.
pub fn homs_brute_force(k0: &Skeleton, k: &Skeleton) -> BTreeSet<(Vec<usize>, Substitution)> {
    let n0 = k0.strand_count();
    let n = k.strand_count();
    let mut out = BTreeSet::new();
    let mut map = vec![0; n0];
    loop {
        let mut ok = true;
        let mut pairs = Vec::new();
        for (i, &j) in map.iter().enumerate() {
            let (src, dst) = (k0.trace(i), k.trace(j));
            if src.len() > dst.len() {
                ok = false;
                break;
            }
            for (a, b) in src.events().iter().zip(dst.events()) {
                if a.dir != b.dir {
                    ok = false;
                }
                pairs.push((&a.msg, &b.msg));
            }
        }
        if ok {
            if let Some(sigma) = match_sequence(pairs, &Substitution::new()) {
                if verify(k0, k, &map, &sigma).is_ok() {
                    out.insert((map.clone(), sigma));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n0 {
                return out;
            }
            map[i] += 1;
            if map[i] < n {
                break;
            }
            map[i] = 0;
            i += 1;
        }
    }
}

pub fn hom_key(d: &Homomorphism) -> (Vec<usize>, Substitution) {
    (d.strand_map().to_vec(), d.subst().clone())
}

/// A well-typed, well-moded conjunction: `p` atoms on one or two strand
/// variables, then a few `prec`, `non`, `uniq`, `orig` and `=` atoms.
pub fn conjunction(rng: &mut Rand, p: &Protocol) -> Conjunction {
    loop {
        let c = conjunction_once(rng, p);
        if mode_check(&c.atoms, &BTreeSet::new()).is_ok()
            && c.atoms.iter().all(|a| a.check(p).is_ok())
        {
            return c;
        }
    }
}

fn conjunction_once(rng: &mut Rand, p: &Protocol) -> Conjunction {
    let names: BTreeMap<Sort, [&str; 2]> = [
        (Sort::Akey, ["ka", "kb"]),
        (Sort::Skey, ["ea", "eb"]),
        (Sort::Data, ["na", "nb"]),
        (Sort::Top, ["ma", "mb"]),
    ]
    .into_iter()
    .collect();
    let pick = |rng: &mut Rand, sort: Sort| v(names[&sort].choose(rng).unwrap(), sort);
    let atomic = [Sort::Akey, Sort::Skey, Sort::Data];
    let strands: Vec<Term> = (0..rng.gen_range(1..=2))
        .map(|i| Term::var(format!("z{i}"), Sort::Nat))
        .collect();
    let mut atoms = Vec::new();
    for z in &strands {
        for _ in 0..rng.gen_range(1..=2) {
            let role = p.roles().choose(rng).unwrap();
            let height = rng.gen_range(1..=role.len());
            let var = role.prefix_vars(height).choose(rng).unwrap().clone();
            let msg = Term::Var(pick(rng, var.sort));
            atoms.push(Atom::Progress {
                role: role.name.clone(),
                height,
                var,
                strand: z.clone(),
                msg,
            });
        }
    }
    let atomic_term = |rng: &mut Rand| {
        let sort = *atomic.choose(rng).unwrap();
        let t = Term::Var(pick(rng, sort));
        if t.sort() == Sort::Akey && rng.gen_bool(0.3) {
            Term::inverse(t)
        } else {
            t
        }
    };
    for _ in 0..rng.gen_range(0..=3) {
        let atom = match rng.gen_range(0..5) {
            0 => Atom::Prec {
                strand: strands.choose(rng).unwrap().clone(),
                index: rng.gen_range(0..3),
                later_strand: strands.choose(rng).unwrap().clone(),
                later_index: rng.gen_range(0..3),
            },
            1 => Atom::Non(atomic_term(rng)),
            2 => Atom::Uniq(atomic_term(rng)),
            3 => Atom::Orig {
                term: atomic_term(rng),
                strand: strands.choose(rng).unwrap().clone(),
                index: rng.gen_range(0..3),
            },
            _ => {
                let sort = *[Sort::Akey, Sort::Skey, Sort::Data, Sort::Top]
                    .choose(rng)
                    .unwrap();
                let [a, b] = names[&sort];
                Atom::Eq(Term::var(a, sort), Term::var(b, sort))
            }
        };
        atoms.push(atom);
    }
    let mut seen = BTreeSet::new();
    for a in &atoms {
        seen.extend(a.vars());
    }
    Conjunction::new(seen.into_iter().collect(), atoms)
}

/// Direct reading of the satisfaction clauses, independent of the search.
pub fn oracle_holds(k: &Skeleton, alpha: &Substitution, atom: &Atom) -> bool {
    let strand = |t: &Term| match alpha.apply(t) {
        Term::Nat(s) if (s as usize) < k.strand_count() => Some(s as usize),
        _ => None,
    };
    let node = |t: &Term, i: usize| strand(t).map(|s| Node::new(s, i)).filter(|n| k.is_node(*n));
    match atom {
        Atom::Progress {
            role,
            height,
            var,
            strand: z,
            msg,
        } => {
            let (Some(s), Some(r)) = (strand(z), k.protocol().role(role)) else {
                return false;
            };
            let tr = k.trace(s);
            if tr.len() < *height {
                return false;
            }
            let pattern = r.trace().prefix(*height);
            let events = tr.prefix(*height);
            if pattern.iter().zip(events).any(|(a, b)| a.dir != b.dir) {
                return false;
            }
            let Ok(seed) = Substitution::new().with(var.clone(), alpha.apply(msg)) else {
                return false;
            };
            match_sequence(
                pattern
                    .iter()
                    .map(|e| &e.msg)
                    .zip(events.iter().map(|e| &e.msg)),
                &seed,
            )
            .is_some()
        }
        Atom::Prec {
            strand: a,
            index,
            later_strand: b,
            later_index,
        } => match (node(a, *index), node(b, *later_index)) {
            (Some(x), Some(y)) => k.precedes(x, y),
            _ => false,
        },
        Atom::Non(t) => k.non_orig().contains(&alpha.apply(t)),
        Atom::Uniq(t) => k.uniq_orig().contains(&alpha.apply(t)),
        Atom::Orig {
            term,
            strand: z,
            index,
        } => {
            let value = alpha.apply(term);
            k.uniq_orig().contains(&value)
                && node(z, *index).is_some_and(|n| k.origination_nodes(&value).contains(&n))
        }
        Atom::Eq(l, r) => alpha.apply(l) == alpha.apply(r),
        Atom::False => false,
    }
}

/// Values a message variable can take in any satisfying assignment: the
/// subterms of the traces and assumptions, and the inverses of keys.
pub fn universe(k: &Skeleton) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for tr in k.traces() {
        for e in tr.events() {
            out.extend(e.msg.subterms());
        }
    }
    out.extend(k.non_orig().iter().cloned());
    out.extend(k.uniq_orig().iter().cloned());
    let keys: Vec<Term> = out.iter().filter(|t| t.sort().is_key()).cloned().collect();
    out.extend(keys.into_iter().map(Term::inverse));
    out
}

/// Every satisfying assignment over the variables of `c`, by trying every
/// value in the universe; atoms are tested as soon as their variables are
/// all assigned.
pub fn assignments_brute_force(k: &Skeleton, c: &Conjunction) -> BTreeSet<Substitution> {
    let vars: Vec<Var> = c.free_vars().into_iter().collect();
    let uni = universe(k);
    let candidates: Vec<Vec<Term>> = vars
        .iter()
        .map(|x| {
            if x.sort == Sort::Nat {
                (0..k.strand_count() as u64).map(Term::Nat).collect()
            } else {
                uni.iter()
                    .filter(|t| t.sort().leq(x.sort))
                    .cloned()
                    .collect()
            }
        })
        .collect();
    let ready: Vec<Vec<&Atom>> = (0..vars.len())
        .map(|i| {
            c.atoms
                .iter()
                .filter(|a| {
                    let av = a.vars();
                    av.contains(&vars[i]) && av.iter().all(|w| vars[..=i].contains(w))
                })
                .collect()
        })
        .collect();
    let closed: Vec<&Atom> = c.atoms.iter().filter(|a| a.vars().is_empty()).collect();
    let mut out = BTreeSet::new();
    if closed
        .iter()
        .all(|a| oracle_holds(k, &Substitution::new(), a))
    {
        search(
            k,
            &vars,
            &candidates,
            &ready,
            0,
            Substitution::new(),
            &mut out,
        );
    }
    out
}

fn search(
    k: &Skeleton,
    vars: &[Var],
    candidates: &[Vec<Term>],
    ready: &[Vec<&Atom>],
    i: usize,
    alpha: Substitution,
    out: &mut BTreeSet<Substitution>,
) {
    if i == vars.len() {
        out.insert(alpha);
        return;
    }
    for t in &candidates[i] {
        let next = alpha.clone().with(vars[i].clone(), t.clone()).unwrap();
        if ready[i].iter().all(|a| oracle_holds(k, &next, a)) {
            search(k, vars, candidates, ready, i + 1, next, out);
        }
    }
}

/// All canonical terms of depth at most `depth` over `alphabet`.
pub fn all_terms(alphabet: &[Var], depth: usize) -> Vec<Term> {
    let mut levels: Vec<Vec<Term>> = vec![alphabet.iter().cloned().map(Term::Var).collect()];
    for d in 2..=depth {
        let below: Vec<Term> = levels.iter().flatten().cloned().collect();
        let keys: Vec<Term> = below
            .iter()
            .filter(|t| t.sort().is_key())
            .cloned()
            .collect();
        let mut level = Vec::new();
        if d == 2 {
            for x in alphabet.iter().filter(|x| x.sort == Sort::Akey) {
                level.push(Term::inverse(Term::Var(x.clone())));
            }
        }
        let last = levels.last().unwrap().clone();
        let is_new = |l: &Term, r: &Term| last.contains(l) || last.contains(r);
        for l in &below {
            for r in &below {
                if is_new(l, r) {
                    level.push(Term::pair(l.clone(), r.clone()));
                }
            }
            for key in &keys {
                if is_new(l, key) {
                    level.push(Term::enc(l.clone(), key.clone()));
                }
            }
        }
        levels.push(level);
    }
    let mut out: Vec<Term> = levels.into_iter().flatten().collect();
    let unique: BTreeSet<Term> = out.iter().cloned().collect();
    assert_eq!(unique.len(), out.len());
    out.retain(|t| t.depth() <= depth);
    out
}

/// `t0 ⊑ t1` by closing `{t1}` under projections and encryption bodies.
pub fn carried_oracle(t0: &Term, t1: &Term) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = vec![t1.clone()];
    while let Some(t) = todo.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        match t {
            Term::Pair(l, r) => {
                todo.push(*l);
                todo.push(*r);
            }
            Term::Enc(b, _) => todo.push(*b),
            _ => {}
        }
    }
    seen.contains(t0)
}

/// Every substitution over the variables of `pattern` whose application
/// equals `target`, trying subterms of the target and their inverses.
pub fn match_oracle(pattern: &Term, target: &Term) -> BTreeSet<Substitution> {
    let vars: Vec<Var> = pattern.vars().into_iter().collect();
    let mut pool = target.subterms();
    let keys: Vec<Term> = pool.iter().filter(|t| t.sort().is_key()).cloned().collect();
    pool.extend(keys.into_iter().map(Term::inverse));
    let candidates: Vec<Vec<Term>> = vars
        .iter()
        .map(|x| {
            pool.iter()
                .filter(|t| t.sort().leq(x.sort))
                .cloned()
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0; vars.len()];
    if candidates.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let sigma = Substitution::from_pairs(
            vars.iter().cloned().zip(
                idx.iter()
                    .enumerate()
                    .map(|(i, &j)| candidates[i][j].clone()),
            ),
        )
        .unwrap();
        if sigma.apply(pattern) == *target {
            out.insert(sigma);
        }
        let mut i = 0;
        loop {
            if i == vars.len() {
                return out;
            }
            idx[i] += 1;
            if idx[i] < candidates[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}
