//! Canned inputs used across the test suites and the CLI demos.
//!
//! Everything here is small enough to verify by hand: a triangle query over
//! a guarded Datalog ontology, a clique family whose width properties are
//! known exactly, a pair of equivalent OMQs with different
//! characteristic-database behavior, and a chain database that is a core.

use std::collections::BTreeMap;

use crate::chase::{Omq, Ontology, Tgd};
use crate::query::{Atom, Cq, Ucq};
use crate::relstruct::{Constant, Fact, Homomorphism, Schema, Structure, Sym};

pub fn con(name: &str) -> Constant {
    Constant::input(name)
}

pub fn fact(rel: &str, args: &[&str]) -> Fact {
    Fact::new(rel, args.iter().map(|a| con(a)).collect())
}

/// Build a structure from literal facts, inferring the schema.
pub fn structure(facts: &[(&str, &[&str])]) -> Structure {
    let schema = Schema::new(
        facts
            .iter()
            .map(|(rel, args)| (Sym::from(*rel), args.len())),
    )
    .expect("consistent literal facts");
    Structure::new(
        schema,
        facts.iter().map(|(rel, args)| fact(rel, args)),
    )
    .expect("literal facts conform")
}

pub fn atom(rel: &str, vars: &[&str]) -> Atom {
    Atom::new(rel, vars.iter().map(|v| Sym::from(*v)).collect())
}

pub fn cq(atoms: &[(&str, &[&str])]) -> Cq {
    Cq::new(atoms.iter().map(|(rel, vars)| atom(rel, vars))).expect("nonempty literal query")
}

/// Identity homomorphism on a structure's domain.
pub fn identity(of: &Structure) -> Homomorphism {
    Homomorphism::identity(of)
}

/// Homomorphism from literal name pairs.
pub fn hom(pairs: &[(&str, &str)]) -> Homomorphism {
    Homomorphism::new(
        pairs
            .iter()
            .map(|(a, b)| (con(a), con(b)))
            .collect::<BTreeMap<_, _>>(),
    )
}

/// The triangle example: a guarded Datalog ontology deriving `S` and `T`
/// facts, a triangle query, and two databases that entail it.
pub struct TriangleExample {
    pub omq: Omq,
    pub d1: Structure,
    pub d2: Structure,
    /// Contraction of the triangle query identifying the first and third
    /// variables.
    pub q_xz_contraction: Cq,
    /// A sub-database of `d2` that maps into it via the identity and keeps
    /// its kernel intact.
    pub divers_db: Structure,
}

pub fn triangle_example() -> TriangleExample {
    let rules = vec![
        Tgd::new(
            vec![atom("U", &["x", "y", "z"]), atom("V", &["x", "z"])],
            vec![atom("T", &["x", "z"])],
        )
        .unwrap(),
        Tgd::new(
            vec![atom("W", &["x", "y", "z"])],
            vec![atom("S", &["y", "z"])],
        )
        .unwrap(),
    ];
    let data_schema = Schema::new([
        (Sym::from("R"), 2),
        (Sym::from("U"), 3),
        (Sym::from("V"), 2),
        (Sym::from("W"), 3),
    ])
    .unwrap();
    let q = cq(&[
        ("R", &["x", "y"]),
        ("S", &["y", "z"]),
        ("T", &["z", "x"]),
    ]);
    let omq = Omq::new(Ontology::new(rules), data_schema, Ucq::single(q)).unwrap();
    let d1 = structure(&[
        ("R", &["a", "b"]),
        ("W", &["d", "b", "a"]),
        ("U", &["a", "d", "a"]),
        ("V", &["a", "a"]),
    ]);
    let d2 = structure(&[
        ("R", &["a", "b"]),
        ("W", &["d", "b", "c"]),
        ("U", &["c", "d", "a"]),
        ("V", &["c", "a"]),
    ]);
    let q_xz_contraction = cq(&[
        ("R", &["x", "y"]),
        ("S", &["y", "x"]),
        ("T", &["x", "x"]),
    ]);
    let divers_db = structure(&[
        ("R", &["a", "b"]),
        ("W", &["d", "b", "c"]),
        ("V", &["c", "a"]),
    ]);
    TriangleExample {
        omq,
        d1,
        d2,
        q_xz_contraction,
        divers_db,
    }
}

/// The clique family: a single rule expands an `i`-ary guard atom `S` into
/// the full ordered `R`-clique on its arguments; the query asks for an
/// `R`-clique and a `T`-clique on the same variables.
pub struct CliqueExample {
    pub omq: Omq,
    /// `{S(a1..ai)}` plus the full ordered `T`-clique.
    pub base_db: Structure,
    /// `{S(a1..ai)}` alone.
    pub guard_db: Structure,
    /// The guarded variant of the query: `S` atom plus both cliques.
    pub guarded_cq: Cq,
    pub arity: usize,
}

fn clique_atoms(rel: &str, vars: &[String]) -> Vec<Atom> {
    let mut atoms = Vec::new();
    for j in 0..vars.len() {
        for k in (j + 1)..vars.len() {
            atoms.push(Atom::new(
                rel,
                vec![Sym::from(vars[j].as_str()), Sym::from(vars[k].as_str())],
            ));
        }
    }
    atoms
}

pub fn clique_example(i: usize) -> CliqueExample {
    assert!(i >= 2);
    let vars: Vec<String> = (1..=i).map(|k| format!("x{}", k)).collect();
    let consts: Vec<String> = (1..=i).map(|k| format!("a{}", k)).collect();
    let guard = Atom::new("S", vars.iter().map(|v| Sym::from(v.as_str())).collect());
    let rule = Tgd::new(vec![guard.clone()], clique_atoms("R", &vars)).unwrap();
    let data_schema = Schema::new([(Sym::from("S"), i), (Sym::from("T"), 2)]).unwrap();
    let mut q_atoms = clique_atoms("R", &vars);
    q_atoms.extend(clique_atoms("T", &vars));
    let q = Cq::new(q_atoms.clone()).unwrap();
    let omq = Omq::new(Ontology::new(vec![rule]), data_schema, Ucq::single(q)).unwrap();

    let s_fact = Fact::new("S", consts.iter().map(|c| con(c)).collect());
    let mut base_facts = vec![s_fact.clone()];
    for j in 0..i {
        for k in (j + 1)..i {
            base_facts.push(fact("T", &[&consts[j], &consts[k]]));
        }
    }
    let base_db = Structure::new(omq.data_schema.clone(), base_facts).unwrap();
    let guard_db = Structure::new(omq.data_schema.clone(), vec![s_fact]).unwrap();

    let mut guarded_atoms = q_atoms;
    guarded_atoms.push(guard);
    let guarded_cq = Cq::new(guarded_atoms).unwrap();

    CliqueExample {
        omq,
        base_db,
        guard_db,
        guarded_cq,
        arity: i,
    }
}

/// Two equivalent OMQs over `{R}` that disagree on which databases are
/// query-initial: one derives a unary marker from `R`-edges, the other asks
/// for an `R`-edge directly.
pub struct EquivalentPairExample {
    pub q1: Omq,
    pub q2: Omq,
    /// `{R(a,a)}`: query-initial for `q1` but not for `q2`.
    pub loop_db: Structure,
}

pub fn equivalent_pair_example() -> EquivalentPairExample {
    let data_schema = Schema::new([(Sym::from("R"), 2)]).unwrap();
    let rule = Tgd::new(
        vec![atom("R", &["x", "y"])],
        vec![atom("A", &["x"])],
    )
    .unwrap();
    let q1 = Omq::new(
        Ontology::new(vec![rule]),
        data_schema.clone(),
        Ucq::single(cq(&[("A", &["x"])])),
    )
    .unwrap();
    let q2 = Omq::new(
        Ontology::empty(),
        data_schema,
        Ucq::single(cq(&[("R", &["x", "y"])])),
    )
    .unwrap();
    EquivalentPairExample {
        q1,
        q2,
        loop_db: structure(&[("R", &["a", "a"])]),
    }
}

/// A marked chain with a self-loop at the end: `A(x0)`, `R(x0,x1)`, ...,
/// `R(x(n-1),xn)`, `R(xn,xn)`, `C(xn)`. Every endomorphism is the identity,
/// so the structure is a core for every `n`.
pub fn core_chain_db(n: usize) -> Structure {
    let name = |k: usize| format!("x{}", k);
    let mut facts: Vec<(String, Vec<String>)> = vec![
        ("A".to_string(), vec![name(0)]),
        ("C".to_string(), vec![name(n)]),
        ("R".to_string(), vec![name(n), name(n)]),
    ];
    for i in 0..n {
        facts.push(("R".to_string(), vec![name(i), name(i + 1)]));
    }
    let schema = Schema::new([
        (Sym::from("A"), 1),
        (Sym::from("C"), 1),
        (Sym::from("R"), 2),
    ])
    .unwrap();
    Structure::new(
        schema,
        facts.into_iter().map(|(rel, args)| {
            Fact::new(rel, args.into_iter().map(Constant::input).collect())
        }),
    )
    .unwrap()
}
