//! Relational schemas and structures, homomorphism search, cores, products,
//! guarded sets and kernels.
//!
//! Structures are finite sets of facts; the domain of a structure is the set
//! of constants occurring in its facts, so there are no floating constants.
//! All values are immutable after construction and all operations are pure,
//! which makes them safe to call concurrently on shared inputs.
//!
//! Homomorphism search is a complete backtracking search with
//! most-constrained-variable ordering and forward checking; results come
//! back in deterministic lexicographic order so that every downstream
//! construction is reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Interned symbol: relation names, constant names, variable names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym(Arc::from(s))
    }
}

impl From<String> for Sym {
    fn from(s: String) -> Sym {
        Sym(Arc::from(s.as_str()))
    }
}

impl std::borrow::Borrow<str> for Sym {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Where a constant came from; constructions preserve these tags.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Origin {
    /// Present in an input database.
    Input,
    /// Fresh null invented by the chase.
    ChaseNull,
    /// Fresh copy made while unraveling.
    UnravelCopy,
    /// Fresh constant introduced during diversification search.
    FreshDiversify,
}

impl Origin {
    pub fn label(&self) -> &'static str {
        match self {
            Origin::Input => "input",
            Origin::ChaseNull => "chase-null",
            Origin::UnravelCopy => "unravel-copy",
            Origin::FreshDiversify => "fresh-diversify",
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant {
    pub name: Sym,
    pub origin: Origin,
}

impl Constant {
    pub fn input(name: impl Into<Sym>) -> Constant {
        Constant {
            name: name.into(),
            origin: Origin::Input,
        }
    }

    pub fn with_origin(name: impl Into<Sym>, origin: Origin) -> Constant {
        Constant {
            name: name.into(),
            origin,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub rel: Sym,
    pub args: Vec<Constant>,
}

impl Fact {
    pub fn new(rel: impl Into<Sym>, args: Vec<Constant>) -> Fact {
        Fact {
            rel: rel.into(),
            args,
        }
    }

    /// The set of constants in the argument tuple (repeats collapse).
    pub fn arg_set(&self) -> BTreeSet<Constant> {
        self.args.iter().cloned().collect()
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite set of relation symbols with positive arities.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Schema {
    arities: BTreeMap<Sym, usize>,
}

impl Schema {
    pub fn new(symbols: impl IntoIterator<Item = (Sym, usize)>) -> Result<Schema, RelError> {
        let mut arities = BTreeMap::new();
        for (name, arity) in symbols {
            if arity == 0 {
                return Err(RelError::BadArity { rel: name });
            }
            if let Some(prev) = arities.insert(name.clone(), arity) {
                if prev != arity {
                    return Err(RelError::ArityConflict {
                        rel: name,
                        left: prev,
                        right: arity,
                    });
                }
            }
        }
        Ok(Schema { arities })
    }

    pub fn arity(&self, rel: &str) -> Option<usize> {
        self.arities.get(rel).copied()
    }

    pub fn contains(&self, rel: &str) -> bool {
        self.arities.contains_key(rel)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Sym, usize)> {
        self.arities.iter().map(|(s, a)| (s, *a))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    /// Merge two schemas; shared symbols must agree on arity.
    pub fn union(&self, other: &Schema) -> Result<Schema, RelError> {
        Schema::new(
            self.arities
                .iter()
                .chain(other.arities.iter())
                .map(|(s, a)| (s.clone(), *a)),
        )
    }

    /// True when every symbol of `other` appears here with the same arity.
    pub fn covers(&self, other: &Schema) -> bool {
        other
            .arities
            .iter()
            .all(|(s, a)| self.arity(s.as_str()) == Some(*a))
    }

    /// True when shared symbols agree on arity.
    pub fn compatible(&self, other: &Schema) -> bool {
        self.arities
            .iter()
            .all(|(s, a)| other.arity(s.as_str()).is_none_or(|b| b == *a))
    }
}

/// A finite relational structure: a schema plus a set of conforming facts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Structure {
    schema: Schema,
    facts: BTreeSet<Fact>,
}

impl Structure {
    pub fn new(schema: Schema, facts: impl IntoIterator<Item = Fact>) -> Result<Structure, RelError> {
        let facts: BTreeSet<Fact> = facts.into_iter().collect();
        let mut names: BTreeMap<Sym, Origin> = BTreeMap::new();
        for f in &facts {
            match schema.arity(f.rel.as_str()) {
                None => {
                    return Err(RelError::UndeclaredRelation { rel: f.rel.clone() });
                }
                Some(a) if a != f.args.len() => {
                    return Err(RelError::ArityMismatch {
                        rel: f.rel.clone(),
                        expected: a,
                        got: f.args.len(),
                    });
                }
                _ => {}
            }
            for c in &f.args {
                if let Some(prev) = names.insert(c.name.clone(), c.origin) {
                    if prev != c.origin {
                        return Err(RelError::NameClash { name: c.name.clone() });
                    }
                }
            }
        }
        Ok(Structure { schema, facts })
    }

    pub fn empty(schema: Schema) -> Structure {
        Structure {
            schema,
            facts: BTreeSet::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    /// Constants occurring in facts.
    pub fn domain(&self) -> BTreeSet<Constant> {
        let mut d = BTreeSet::new();
        for f in &self.facts {
            d.extend(f.args.iter().cloned());
        }
        d
    }

    /// Substructure induced by a constant set: all facts with arguments
    /// inside it.
    pub fn induced(&self, keep: &BTreeSet<Constant>) -> Structure {
        Structure {
            schema: self.schema.clone(),
            facts: self
                .facts
                .iter()
                .filter(|f| f.args.iter().all(|a| keep.contains(a)))
                .cloned()
                .collect(),
        }
    }

    /// Set-union of facts; schemas are merged.
    pub fn union(&self, other: &Structure) -> Result<Structure, RelError> {
        Structure::new(
            self.schema.union(&other.schema)?,
            self.facts.iter().chain(other.facts.iter()).cloned(),
        )
    }

    pub fn is_subset_of(&self, other: &Structure) -> bool {
        self.facts.is_subset(&other.facts)
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, fact) in self.facts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fact)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A total map on the domain of a source structure.
///
/// The struct stores only the map; `verify` checks the homomorphism
/// condition against a concrete source and target by direct scan.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Homomorphism {
    map: BTreeMap<Constant, Constant>,
}

impl Homomorphism {
    pub fn new(map: BTreeMap<Constant, Constant>) -> Homomorphism {
        Homomorphism { map }
    }

    pub fn identity(of: &Structure) -> Homomorphism {
        Homomorphism {
            map: of.domain().into_iter().map(|c| (c.clone(), c)).collect(),
        }
    }

    pub fn map(&self) -> &BTreeMap<Constant, Constant> {
        &self.map
    }

    pub fn apply(&self, c: &Constant) -> Option<&Constant> {
        self.map.get(c)
    }

    pub fn apply_fact(&self, fact: &Fact) -> Option<Fact> {
        let mut args = Vec::with_capacity(fact.args.len());
        for a in &fact.args {
            args.push(self.map.get(a)?.clone());
        }
        Some(Fact::new(fact.rel.clone(), args))
    }

    /// Range of the map, as a set.
    pub fn range(&self) -> BTreeSet<Constant> {
        self.map.values().cloned().collect()
    }

    /// Total on `dom(source)` and fact-preserving into `target`.
    pub fn verify(&self, source: &Structure, target: &Structure) -> bool {
        for c in source.domain() {
            if !self.map.contains_key(&c) {
                return false;
            }
        }
        source.facts().iter().all(|f| {
            self.apply_fact(f)
                .is_some_and(|img| target.contains(&img))
        })
    }

    /// Injective on every guarded set of `source`, which is equivalent to
    /// being injective on every fact's argument set.
    pub fn is_igs(&self, source: &Structure) -> bool {
        source.facts().iter().all(|f| {
            let args = f.arg_set();
            let images: BTreeSet<_> = args.iter().filter_map(|a| self.map.get(a)).collect();
            images.len() == args.len()
        })
    }

    pub fn injective_on(&self, set: &BTreeSet<Constant>) -> bool {
        let images: BTreeSet<_> = set.iter().filter_map(|a| self.map.get(a)).collect();
        images.len() == set.iter().filter(|a| self.map.contains_key(a)).count()
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<_> = self.map.values().collect();
        images.len() == self.map.len()
    }

    /// `other` after `self`: first apply `self`, then `other`.
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        Homomorphism {
            map: self
                .map
                .iter()
                .filter_map(|(k, v)| other.apply(v).map(|w| (k.clone(), w.clone())))
                .collect(),
        }
    }

    /// Restriction to the given constants.
    pub fn restrict(&self, keep: &BTreeSet<Constant>) -> Homomorphism {
        Homomorphism {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Image structure: the facts of `source` pushed through the map.
    pub fn image(&self, source: &Structure) -> Result<Structure, RelError> {
        let facts: Option<BTreeSet<Fact>> =
            source.facts().iter().map(|f| self.apply_fact(f)).collect();
        match facts {
            Some(facts) => Structure::new(source.schema().clone(), facts),
            None => Err(RelError::PartialMapOutOfRange),
        }
    }
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}->{}", k, v)?;
        }
        write!(f, "}}")
    }
}

/// Search mode for homomorphism enumeration.
#[derive(Clone, Debug)]
pub enum HomMode {
    Any,
    Injective,
    /// Extend a fixed partial map.
    Extend(BTreeMap<Constant, Constant>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelError {
    BadArity { rel: Sym },
    ArityConflict { rel: Sym, left: usize, right: usize },
    ArityMismatch { rel: Sym, expected: usize, got: usize },
    UndeclaredRelation { rel: Sym },
    NameClash { name: Sym },
    SchemaMismatch,
    PartialMapOutOfRange,
}

impl fmt::Display for RelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelError::BadArity { rel } => write!(f, "relation {} must have arity >= 1", rel),
            RelError::ArityConflict { rel, left, right } => {
                write!(f, "relation {} declared with arities {} and {}", rel, left, right)
            }
            RelError::ArityMismatch { rel, expected, got } => {
                write!(f, "fact over {} has {} arguments, schema says {}", rel, got, expected)
            }
            RelError::UndeclaredRelation { rel } => write!(f, "relation {} not in schema", rel),
            RelError::NameClash { name } => {
                write!(f, "constant name {} used with two different origins", name)
            }
            RelError::SchemaMismatch => write!(f, "structures are over different schemas"),
            RelError::PartialMapOutOfRange => {
                write!(f, "partial map mentions constants outside the given domains")
            }
        }
    }
}

impl std::error::Error for RelError {}

struct HomSearch<'a> {
    vars: Vec<Constant>,
    facts: Vec<&'a Fact>,
    var_positions: Vec<Vec<(usize, usize)>>, // var -> (fact index, position)
    target_by_rel: BTreeMap<&'a str, Vec<&'a Fact>>,
    injective: bool,
    limit: Option<usize>,
    results: Vec<Homomorphism>,
}

impl<'a> HomSearch<'a> {
    fn run(&mut self, assignment: &mut Vec<Option<Constant>>, domains: &[Vec<Constant>]) -> bool {
        let next = (0..self.vars.len())
            .filter(|i| assignment[*i].is_none())
            .min_by_key(|i| domains[*i].len());
        let Some(v) = next else {
            self.results.push(Homomorphism::new(
                self.vars
                    .iter()
                    .cloned()
                    .zip(assignment.iter().map(|a| a.clone().unwrap()))
                    .collect(),
            ));
            return self.limit.is_some_and(|l| self.results.len() >= l);
        };
        for val in &domains[v] {
            if self.injective
                && assignment
                    .iter()
                    .any(|a| a.as_ref() == Some(val))
            {
                continue;
            }
            assignment[v] = Some(val.clone());
            let mut next_domains = domains.to_vec();
            next_domains[v] = vec![val.clone()];
            if self.propagate(assignment, &mut next_domains, v)
                && self.run(assignment, &next_domains) {
                    assignment[v] = None;
                    return true;
                }
            assignment[v] = None;
        }
        false
    }

    /// Forward checking: restrict the domains of unassigned variables that
    /// share a fact with `changed`; returns false when some domain empties.
    #[allow(clippy::needless_range_loop)]
    fn propagate(
        &self,
        assignment: &[Option<Constant>],
        domains: &mut [Vec<Constant>],
        changed: usize,
    ) -> bool {
        let mut queue: Vec<usize> = self.var_positions[changed]
            .iter()
            .map(|(fi, _)| *fi)
            .collect();
        queue.sort_unstable();
        queue.dedup();
        while let Some(fi) = queue.pop() {
            let fact = self.facts[fi];
            let arity = fact.args.len();
            let var_of: Vec<usize> = fact
                .args
                .iter()
                .map(|a| self.vars.binary_search(a).expect("constant is a variable"))
                .collect();
            let candidates: Vec<&&Fact> = self
                .target_by_rel
                .get(fact.rel.as_str())
                .map(|v| {
                    v.iter()
                        .filter(|bf| {
                            // positional match against current knowledge,
                            // honoring repeated variables
                            for p in 0..arity {
                                let vp = var_of[p];
                                if let Some(c) = &assignment[vp] {
                                    if &bf.args[p] != c {
                                        return false;
                                    }
                                }
                                for q in (p + 1)..arity {
                                    if var_of[q] == vp && bf.args[q] != bf.args[p] {
                                        return false;
                                    }
                                }
                            }
                            true
                        })
                        .collect()
                })
                .unwrap_or_default();
            if candidates.is_empty() {
                return false;
            }
            for p in 0..arity {
                let vp = var_of[p];
                if assignment[vp].is_some() {
                    continue;
                }
                let allowed: BTreeSet<&Constant> =
                    candidates.iter().map(|bf| &bf.args[p]).collect();
                let before = domains[vp].len();
                domains[vp].retain(|c| allowed.contains(c));
                if domains[vp].is_empty() {
                    return false;
                }
                if domains[vp].len() < before {
                    for (fj, _) in &self.var_positions[vp] {
                        if *fj != fi && !queue.contains(fj) {
                            queue.push(*fj);
                        }
                    }
                }
            }
        }
        true
    }
}

/// Complete backtracking search for homomorphisms from `a` to `b`.
///
/// Returns up to `limit` homomorphisms, sorted lexicographically by their
/// assignment maps. With `limit = None` the result is the full set, so an
/// empty result means none exists. Schemas must be compatible (shared
/// symbols agree on arity); `a` may use symbols absent from `b`.
pub fn find_homomorphisms(
    a: &Structure,
    b: &Structure,
    mode: HomMode,
    limit: Option<usize>,
) -> Result<Vec<Homomorphism>, RelError> {
    if !a.schema().compatible(b.schema()) {
        return Err(RelError::SchemaMismatch);
    }
    let vars: Vec<Constant> = a.domain().into_iter().collect();
    let b_domain = b.domain();
    let (injective, seed) = match &mode {
        HomMode::Any => (false, BTreeMap::new()),
        HomMode::Injective => (true, BTreeMap::new()),
        HomMode::Extend(seed) => {
            for (k, v) in seed {
                if vars.binary_search(k).is_err() || !b_domain.contains(v) {
                    return Err(RelError::PartialMapOutOfRange);
                }
            }
            (false, seed.clone())
        }
    };
    if vars.is_empty() {
        // The empty map is vacuously a homomorphism.
        return Ok(vec![Homomorphism::new(BTreeMap::new())]);
    }

    let facts: Vec<&Fact> = a.facts().iter().collect();
    let mut var_positions: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vars.len()];
    for (fi, f) in facts.iter().enumerate() {
        for (p, arg) in f.args.iter().enumerate() {
            let vi = vars.binary_search(arg).expect("domain covers all arguments");
            var_positions[vi].push((fi, p));
        }
    }
    let mut target_by_rel: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
    for f in b.facts() {
        target_by_rel.entry(f.rel.as_str()).or_default().push(f);
    }

    // Initial domains: values supported position-wise by every incident fact.
    let mut domains: Vec<Vec<Constant>> = Vec::with_capacity(vars.len());
    for (vi, v) in vars.iter().enumerate() {
        let mut dom: Option<BTreeSet<Constant>> = None;
        if let Some(c) = seed.get(v) {
            dom = Some([c.clone()].into_iter().collect());
        }
        for (fi, p) in &var_positions[vi] {
            let allowed: BTreeSet<Constant> = target_by_rel
                .get(facts[*fi].rel.as_str())
                .map(|cands| cands.iter().map(|bf| bf.args[*p].clone()).collect())
                .unwrap_or_default();
            dom = Some(match dom {
                None => allowed,
                Some(d) => d.intersection(&allowed).cloned().collect(),
            });
        }
        let dom = dom.unwrap_or_default();
        if dom.is_empty() {
            return Ok(Vec::new());
        }
        domains.push(dom.into_iter().collect());
    }

    let mut search = HomSearch {
        vars,
        facts,
        var_positions,
        target_by_rel,
        injective,
        limit,
        results: Vec::new(),
    };
    let mut assignment = vec![None; search.vars.len()];
    search.run(&mut assignment, &domains);
    let mut results = search.results;
    results.sort();
    Ok(results)
}

/// True when some homomorphism from `a` to `b` exists.
pub fn hom_exists(a: &Structure, b: &Structure) -> bool {
    find_homomorphisms(a, b, HomMode::Any, Some(1))
        .map(|v| !v.is_empty())
        .unwrap_or(false)
}

/// True when `a -> b` and every homomorphism from `a` to `b` is injective,
/// established by exhaustive enumeration.
pub fn is_injective_only(a: &Structure, b: &Structure) -> bool {
    match find_homomorphisms(a, b, HomMode::Any, None) {
        Ok(all) => !all.is_empty() && all.iter().all(|h| h.is_injective()),
        Err(_) => false,
    }
}

/// The product structure together with its two projections.
///
/// Facts are exactly `r((a1,b1),...,(an,bn))` for `r(a)` in `a` and `r(b)`
/// in `b`; pair constants are named `left*right`. Only pairs occurring in
/// facts are part of the domain.
pub fn product(
    a: &Structure,
    b: &Structure,
) -> Result<(Structure, Homomorphism, Homomorphism), RelError> {
    if a.schema() != b.schema() {
        return Err(RelError::SchemaMismatch);
    }
    let mut facts = BTreeSet::new();
    let mut proj_a = BTreeMap::new();
    let mut proj_b = BTreeMap::new();
    let mut by_rel: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
    for g in b.facts() {
        by_rel.entry(g.rel.as_str()).or_default().push(g);
    }
    for f in a.facts() {
        for g in by_rel.get(f.rel.as_str()).into_iter().flatten() {
            let args: Vec<Constant> = f
                .args
                .iter()
                .zip(g.args.iter())
                .map(|(x, y)| pair_constant(x, y))
                .collect();
            for (pair, (x, y)) in args.iter().zip(f.args.iter().zip(g.args.iter())) {
                proj_a.insert(pair.clone(), x.clone());
                proj_b.insert(pair.clone(), y.clone());
            }
            facts.insert(Fact::new(f.rel.clone(), args));
        }
    }
    let prod = Structure::new(a.schema().clone(), facts)?;
    Ok((prod, Homomorphism::new(proj_a), Homomorphism::new(proj_b)))
}

fn pair_constant(a: &Constant, b: &Constant) -> Constant {
    Constant::input(format!("{}*{}", a.name, b.name))
}

/// Analysis of guarded sets: the maximal ones, plus the kernel (constants in
/// at least two facts).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedAnalysis {
    pub maximal_guarded_sets: Vec<BTreeSet<Constant>>,
    pub kernel: BTreeSet<Constant>,
}

pub fn guarded_analysis(d: &Structure) -> GuardedAnalysis {
    let arg_sets: BTreeSet<BTreeSet<Constant>> = d.facts().iter().map(|f| f.arg_set()).collect();
    let maximal: Vec<BTreeSet<Constant>> = arg_sets
        .iter()
        .filter(|s| !arg_sets.iter().any(|t| *s != t && s.is_subset(t)))
        .cloned()
        .collect();
    let mut counts: BTreeMap<Constant, usize> = BTreeMap::new();
    for f in d.facts() {
        for c in f.arg_set() {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    GuardedAnalysis {
        maximal_guarded_sets: maximal,
        kernel: counts
            .into_iter()
            .filter(|(_, n)| *n >= 2)
            .map(|(c, _)| c)
            .collect(),
    }
}

/// True when the constant set is contained in some fact's argument set.
pub fn is_guarded_in(set: &BTreeSet<Constant>, d: &Structure) -> bool {
    d.facts().iter().any(|f| set.is_subset(&f.arg_set()))
}

/// The core of `d` (an induced substructure with no non-injective
/// endomorphism) together with a retraction witnessing `d -> core`.
///
/// Non-injective endomorphisms are searched in lexicographic order of the
/// collision they realize, so the output is canonical per input.
pub fn core_of(d: &Structure) -> (Structure, Homomorphism) {
    let mut current = d.clone();
    let mut retraction = Homomorphism::identity(d);
    loop {
        let Some(h) = first_noninjective_endomorphism(&current) else {
            return (current, retraction);
        };
        let g = idempotent_retraction(&h);
        let fixed: BTreeSet<Constant> = g
            .map()
            .iter()
            .filter(|(k, v)| k == v)
            .map(|(k, _)| k.clone())
            .collect();
        current = current.induced(&fixed);
        retraction = retraction.then(&g);
    }
}

fn first_noninjective_endomorphism(d: &Structure) -> Option<Homomorphism> {
    let dom: Vec<Constant> = d.domain().into_iter().collect();
    for (i, u) in dom.iter().enumerate() {
        for v in dom.iter().skip(i + 1) {
            for c in &dom {
                let seed: BTreeMap<Constant, Constant> =
                    [(u.clone(), c.clone()), (v.clone(), c.clone())]
                        .into_iter()
                        .collect();
                if let Ok(mut found) =
                    find_homomorphisms(d, d, HomMode::Extend(seed), Some(1))
                {
                    if let Some(h) = found.pop() {
                        return Some(h);
                    }
                }
            }
        }
    }
    None
}

/// Iterate an endomorphism to an idempotent power: first collapse tails with
/// `h^n`, then cancel the permutation on the eventual image.
fn idempotent_retraction(h: &Homomorphism) -> Homomorphism {
    let n = h.map().len().max(1) as u128;
    let t = power(h, n);
    let image: BTreeSet<Constant> = t.range();
    // t restricted to its image is a permutation; its order is the lcm of
    // cycle lengths.
    let mut order: u128 = 1;
    let mut seen: BTreeSet<Constant> = BTreeSet::new();
    for start in &image {
        if seen.contains(start) {
            continue;
        }
        let mut len: u128 = 0;
        let mut cur = start.clone();
        loop {
            seen.insert(cur.clone());
            len += 1;
            cur = t.apply(&cur).expect("total on image").clone();
            if &cur == start {
                break;
            }
        }
        order = order / gcd_u128(order, len) * len;
    }
    let g = power(&t, order);
    debug_assert!(g.then(&g) == g, "retraction must be idempotent");
    g
}

fn power(h: &Homomorphism, mut e: u128) -> Homomorphism {
    let mut base = h.clone();
    let mut acc: Option<Homomorphism> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.then(&base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = base.then(&base);
        }
    }
    acc.unwrap_or_else(|| h.clone())
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

/// Isomorphism check: equal domain and per-relation fact counts, plus an
/// injective homomorphism (which is then automatically onto).
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.domain().len() != b.domain().len() || a.len() != b.len() {
        return false;
    }
    let count_by_rel = |s: &Structure| {
        let mut m: BTreeMap<Sym, usize> = BTreeMap::new();
        for f in s.facts() {
            *m.entry(f.rel.clone()).or_insert(0) += 1;
        }
        m
    };
    if count_by_rel(a) != count_by_rel(b) {
        return false;
    }
    matches!(
        find_homomorphisms(a, b, HomMode::Injective, Some(1)),
        Ok(v) if !v.is_empty()
    )
}

/// Two-way homomorphic equivalence.
pub fn hom_equivalent(a: &Structure, b: &Structure) -> bool {
    hom_exists(a, b) && hom_exists(b, a)
}

const CANONICAL_KEY_MAX_DOMAIN: usize = 8;

/// A canonical label for a small structure: the lexicographically least
/// rendering over all relabelings of its domain. Two structures with at
/// most 8 constants get equal keys iff they are isomorphic (origins
/// ignored); beyond that the literal name-preserving rendering is used,
/// which is still deterministic but may keep isomorphic duplicates apart.
pub fn canonical_key(d: &Structure) -> String {
    let dom: Vec<Constant> = d.domain().into_iter().collect();
    if dom.len() > CANONICAL_KEY_MAX_DOMAIN {
        return format!("!{:?}", d);
    }
    if dom.is_empty() {
        return String::new();
    }
    let mut best: Option<String> = None;
    let mut perm: Vec<usize> = (0..dom.len()).collect();
    permutations(&mut perm, 0, &mut |p| {
        let rendering = render_with(d, &dom, p);
        if best.as_ref().is_none_or(|b| rendering < *b) {
            best = Some(rendering);
        }
    });
    best.unwrap()
}

fn render_with(d: &Structure, dom: &[Constant], perm: &[usize]) -> String {
    let index_of = |c: &Constant| {
        let i = dom.binary_search(c).unwrap();
        perm[i]
    };
    let mut lines: Vec<String> = d
        .facts()
        .iter()
        .map(|f| {
            let args: Vec<String> = f.args.iter().map(|a| index_of(a).to_string()).collect();
            format!("{}({})", f.rel, args.join(","))
        })
        .collect();
    lines.sort();
    lines.join(";")
}

fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}
