//! Boolean conjunctive queries and unions: canonical databases,
//! contractions, sub-queries, evaluation over structures.
//!
//! Queries are Boolean throughout; the data model rejects answer variables
//! rather than carrying unused machinery for them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::relstruct::{
    find_homomorphisms, Constant, Fact, HomMode, Homomorphism, RelError, Schema, Structure, Sym,
};

/// A relational atom over variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Sym,
    pub args: Vec<Sym>,
}

impl Atom {
    pub fn new(rel: impl Into<Sym>, args: Vec<Sym>) -> Atom {
        Atom {
            rel: rel.into(),
            args,
        }
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.args.iter().cloned().collect()
    }

    /// The atom read as a fact, variables becoming input constants.
    pub fn as_fact(&self) -> Fact {
        Fact::new(
            self.rel.clone(),
            self.args.iter().map(|v| Constant::input(v.clone())).collect(),
        )
    }

    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Atom {
        Atom {
            rel: self.rel.clone(),
            args: self
                .args
                .iter()
                .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, v) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A Boolean conjunctive query: a nonempty set of atoms, all of whose
/// variables are existentially quantified.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cq {
    atoms: BTreeSet<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryError {
    Empty,
    Rel(RelError),
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::Empty => write!(f, "a conjunctive query needs at least one atom"),
            QueryError::Rel(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for QueryError {}

impl From<RelError> for QueryError {
    fn from(e: RelError) -> QueryError {
        QueryError::Rel(e)
    }
}

impl Cq {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Cq, QueryError> {
        let atoms: BTreeSet<Atom> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(QueryError::Empty);
        }
        // Arity consistency across atoms.
        Schema::new(atoms.iter().map(|a| (a.rel.clone(), a.args.len())))?;
        Ok(Cq { atoms })
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.atoms.iter().flat_map(|a| a.vars()).collect()
    }

    pub fn schema(&self) -> Schema {
        Schema::new(self.atoms.iter().map(|a| (a.rel.clone(), a.args.len())))
            .expect("validated at construction")
    }

    /// The canonical database: variables become constants, atoms become
    /// facts.
    pub fn canonical_db(&self) -> Structure {
        Structure::new(self.schema(), self.atoms.iter().map(|a| a.as_fact()))
            .expect("atoms conform to their own schema")
    }

    /// Apply a variable identification / renaming and re-canonicalize the
    /// atom set.
    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Cq {
        Cq {
            atoms: self.atoms.iter().map(|a| a.rename(map)).collect(),
        }
    }

    /// Deterministic canonical form: variables become `v0, v1, ...` in
    /// order of first occurrence in the sorted atom list. Identical up to
    /// renaming inputs that sort identically get equal forms; full
    /// isomorphism-level identification is done with structure isomorphism
    /// where needed.
    pub fn canonicalize(&self) -> Cq {
        let mut order: Vec<Sym> = Vec::new();
        for atom in &self.atoms {
            for v in &atom.args {
                if !order.contains(v) {
                    order.push(v.clone());
                }
            }
        }
        let map: BTreeMap<Sym, Sym> = order
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, Sym::from(format!("v{}", i))))
            .collect();
        self.rename(&map)
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A union of conjunctive queries; nonempty, with arity-consistent symbols
/// across disjuncts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ucq {
    disjuncts: Vec<Cq>,
}

impl Ucq {
    pub fn new(disjuncts: Vec<Cq>) -> Result<Ucq, QueryError> {
        if disjuncts.is_empty() {
            return Err(QueryError::Empty);
        }
        let mut schema = Schema::default();
        for d in &disjuncts {
            schema = schema.union(&d.schema())?;
        }
        Ok(Ucq { disjuncts })
    }

    pub fn single(cq: Cq) -> Ucq {
        Ucq { disjuncts: vec![cq] }
    }

    pub fn disjuncts(&self) -> &[Cq] {
        &self.disjuncts
    }

    pub fn schema(&self) -> Schema {
        self.disjuncts
            .iter()
            .fold(Schema::default(), |acc, d| {
                acc.union(&d.schema()).expect("validated at construction")
            })
    }
}

impl fmt::Debug for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

/// All CQs obtained from `q` by identifying variables: one per partition of
/// `var(q)`, canonically renamed and deduplicated. Includes `q` itself (the
/// trivial partition).
pub fn contractions(q: &Cq) -> Vec<Cq> {
    let vars: Vec<Sym> = q.vars().into_iter().collect();
    let mut seen: BTreeSet<Cq> = BTreeSet::new();
    let mut out: Vec<Cq> = Vec::new();
    // Partitions via restricted growth strings: block[i] <= max(block[..i]) + 1.
    let mut blocks = vec![0usize; vars.len()];
    loop {
        // Identify each variable with the lexicographically least member of
        // its block.
        let mut rep: BTreeMap<usize, Sym> = BTreeMap::new();
        for (i, b) in blocks.iter().enumerate() {
            rep.entry(*b).or_insert_with(|| vars[i].clone());
        }
        let map: BTreeMap<Sym, Sym> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), rep[&blocks[i]].clone()))
            .collect();
        let contracted = q.rename(&map).canonicalize();
        if seen.insert(contracted.clone()) {
            out.push(contracted);
        }
        // Next restricted growth string.
        let mut i = vars.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let cap = blocks[..i].iter().copied().max().map_or(0, |m| m + 1);
            if blocks[i] < cap {
                blocks[i] += 1;
                for b in blocks[i + 1..].iter_mut() {
                    *b = 0;
                }
                break;
            }
        }
    }
}

/// All nonempty sub-queries (atom subsets), canonicalized and deduplicated.
pub fn subqueries(q: &Cq) -> Vec<Cq> {
    let atoms: Vec<Atom> = q.atoms().iter().cloned().collect();
    let mut seen: BTreeSet<Cq> = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << atoms.len()) {
        let subset = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone());
        let sub = Cq::new(subset).expect("nonempty by mask").canonicalize();
        if seen.insert(sub.clone()) {
            out.push(sub);
        }
    }
    out
}

/// Boolean evaluation: does the canonical database of some disjunct map
/// homomorphically into `i`?
pub fn evaluate_cq(q: &Cq, i: &Structure) -> bool {
    evaluate_cq_witness(q, i).is_some()
}

/// Like [`evaluate_cq`] but returns the lexicographically least witnessing
/// homomorphism.
pub fn evaluate_cq_witness(q: &Cq, i: &Structure) -> Option<Homomorphism> {
    find_homomorphisms(&q.canonical_db(), i, HomMode::Any, Some(1))
        .ok()
        .and_then(|mut v| if v.is_empty() { None } else { Some(v.remove(0)) })
}

pub fn evaluate_ucq(q: &Ucq, i: &Structure) -> bool {
    q.disjuncts().iter().any(|d| evaluate_cq(d, i))
}
