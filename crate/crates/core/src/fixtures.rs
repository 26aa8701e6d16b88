//! Reference protocols and skeletons built directly through the API.
//!
//! `blanchet` is the simplified Denning-Sacco key distribution protocol with
//! its one-shape analysis, `amended` binds the responder's key inside the
//! signature, and `artificial` has a responder that accepts a message of
//! any sort.

use std::sync::Arc;

use crate::algebra::{Sort, Substitution, Term, Var, VariableSet};
use crate::skeleton::{Event, Instance, Node, Protocol, Role, Skeleton, Trace};

fn vars(decls: &[(&str, Sort)]) -> VariableSet {
    decls.iter().map(|&(n, s)| Var::new(n, s)).collect()
}

fn v(name: &str, sort: Sort) -> Term {
    Term::var(name, sort)
}

fn subst(pairs: &[(&str, Sort, Term)]) -> Substitution {
    Substitution::from_pairs(pairs.iter().map(|(n, s, t)| (Var::new(*n, *s), t.clone())))
        .expect("fixture substitution is well sorted")
}

pub mod blanchet {
    use super::*;

    /// First message; `signed_extra` adds the responder's key under the
    /// signature, as in the amended protocol.
    pub(crate) fn first_message(s: Term, a: Term, b: Term, signed_extra: bool) -> Term {
        let body = if signed_extra {
            Term::pair(s, b.clone())
        } else {
            s
        };
        Term::enc(Term::enc(body, Term::invk(a)), b)
    }

    pub(crate) fn protocol_with(amended: bool) -> Arc<Protocol> {
        let decls = [
            ("a", Sort::Akey),
            ("b", Sort::Akey),
            ("s", Sort::Skey),
            ("d", Sort::Data),
        ];
        let (a, b, s, d) = (
            v("a", Sort::Akey),
            v("b", Sort::Akey),
            v("s", Sort::Skey),
            v("d", Sort::Data),
        );
        let m1 = first_message(s.clone(), a, b, amended);
        let m2 = Term::enc(d, s);
        let init = Role::new(
            "init",
            vars(&decls),
            Trace::new(vec![Event::send(m1.clone()), Event::recv(m2.clone())]).unwrap(),
        )
        .unwrap();
        let resp = Role::new(
            "resp",
            vars(&decls),
            Trace::new(vec![Event::recv(m1), Event::send(m2)]).unwrap(),
        )
        .unwrap();
        Arc::new(Protocol::new("blanchet", vec![init, resp]).unwrap())
    }

    pub fn protocol() -> Arc<Protocol> {
        protocol_with(false)
    }

    pub(crate) fn resp_instance(p: &Protocol) -> Instance {
        Instance::new(
            p.role("resp").unwrap().clone(),
            2,
            subst(&[
                ("a", Sort::Akey, v("a", Sort::Akey)),
                ("b", Sort::Akey, v("b", Sort::Akey)),
                ("s", Sort::Skey, v("s", Sort::Skey)),
                ("d", Sort::Data, v("d", Sort::Data)),
            ]),
        )
        .unwrap()
    }

    pub(crate) fn pov(p: Arc<Protocol>) -> Skeleton {
        let inst = resp_instance(&p);
        Skeleton::new(
            p,
            vars(&[
                ("a", Sort::Akey),
                ("b", Sort::Akey),
                ("s", Sort::Skey),
                ("d", Sort::Data),
            ]),
            vec![inst],
            [],
            [
                Term::invk(v("a", Sort::Akey)),
                Term::invk(v("b", Sort::Akey)),
            ],
            [v("s", Sort::Skey)],
        )
        .unwrap()
    }

    pub(crate) fn shape(p: Arc<Protocol>, init_key: &str) -> Skeleton {
        let resp = resp_instance(&p);
        let init = Instance::new(
            p.role("init").unwrap().clone(),
            1,
            subst(&[
                ("a", Sort::Akey, v("a", Sort::Akey)),
                ("b", Sort::Akey, v(init_key, Sort::Akey)),
                ("s", Sort::Skey, v("s", Sort::Skey)),
            ]),
        )
        .unwrap();
        let mut decls = vec![("a", Sort::Akey), ("b", Sort::Akey)];
        if init_key != "b" {
            decls.push((init_key, Sort::Akey));
        }
        decls.extend([("s", Sort::Skey), ("d", Sort::Data)]);
        Skeleton::new(
            p,
            vars(&decls),
            vec![resp, init],
            [(Node::new(1, 0), Node::new(0, 0))],
            [
                Term::invk(v("a", Sort::Akey)),
                Term::invk(v("b", Sort::Akey)),
            ],
            [v("s", Sort::Skey)],
        )
        .unwrap()
    }

    /// The point-of-view skeleton: one complete responder strand.
    pub fn k0() -> Skeleton {
        pov(protocol())
    }

    /// The single shape, whose initiator encrypts with `b'`.
    pub fn k1() -> Skeleton {
        shape(protocol(), "b'")
    }

    /// The strand map and substitution of the shape's homomorphism.
    pub fn delta1() -> (Vec<usize>, Substitution) {
        (
            vec![0],
            subst(&[
                ("a", Sort::Akey, v("a", Sort::Akey)),
                ("b", Sort::Akey, v("b", Sort::Akey)),
                ("s", Sort::Skey, v("s", Sort::Skey)),
                ("d", Sort::Data, v("d", Sort::Data)),
            ]),
        )
    }
}

pub mod amended {
    use super::*;

    /// Same role names and variables as `blanchet`, with `(cat s b)` signed.
    pub fn protocol() -> Arc<Protocol> {
        blanchet::protocol_with(true)
    }

    pub fn k0() -> Skeleton {
        blanchet::pov(protocol())
    }

    /// Shape whose initiator instance maps its `b` to the responder's `b`.
    pub fn k1() -> Skeleton {
        blanchet::shape(protocol(), "b")
    }

    pub fn delta1() -> (Vec<usize>, Substitution) {
        blanchet::delta1()
    }
}

pub mod artificial {
    use super::*;

    pub fn protocol() -> Arc<Protocol> {
        let (a, d, x) = (v("a", Sort::Akey), v("d", Sort::Data), v("x", Sort::Top));
        let init = Role::new(
            "init",
            vars(&[("a", Sort::Akey), ("d", Sort::Data)]),
            Trace::new(vec![
                Event::send(Term::enc(d.clone(), a)),
                Event::recv(d.clone()),
            ])
            .unwrap(),
        )
        .unwrap();
        let resp = Role::new(
            "resp",
            vars(&[("x", Sort::Top), ("d", Sort::Data)]),
            Trace::new(vec![Event::recv(x), Event::send(d)]).unwrap(),
        )
        .unwrap();
        Arc::new(Protocol::new("artificial", vec![init, resp]).unwrap())
    }
}
