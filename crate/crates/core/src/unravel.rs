//! Guarded unravelings, the gluing of unravelings onto a database,
//! diversifications and their preorder, bounded query-initiality checks,
//! minimal-diversification search, and the diversification-from-witness
//! construction.
//!
//! The infinite unraveling is never materialized. Truncations grow level by
//! level until the entailed sub-queries stop changing and every atomic
//! consequence of the base database on the root set is reproduced, capped
//! by a configurable depth; results carry a `stabilized` flag that is
//! definitive when the unraveling tree was exhausted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::chase::{
    atomic_consequences, eval_omq, run_chase, ChaseError, Omq, OmqVerdict,
};
use crate::query::{contractions, evaluate_cq, subqueries, Cq};
use crate::relstruct::{
    canonical_key, core_of, find_homomorphisms, guarded_analysis, is_guarded_in, Constant, Fact,
    HomMode, Homomorphism, Origin, RelError, Structure, Sym,
};

/// Largest pull-back fact set whose subsets the bounded searches will
/// enumerate; beyond it they report incompleteness instead of silently
/// truncating.
const SUBSET_CAP: usize = 18;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnravelError {
    NotGuarded,
    NotAHomomorphism,
    NotIgs,
    NotADiversification,
    NotAModel,
    InvalidWitnessHom { reason: String },
    Postcondition { point: u8, detail: String },
    Rel(RelError),
    Chase(ChaseError),
}

impl fmt::Display for UnravelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnravelError::NotGuarded => write!(f, "the requested root set is not guarded"),
            UnravelError::NotAHomomorphism => write!(f, "the given map is not a homomorphism"),
            UnravelError::NotIgs => {
                write!(f, "the given map is not injective on guarded sets")
            }
            UnravelError::NotADiversification => {
                write!(f, "the given pair is not a diversification")
            }
            UnravelError::NotAModel => write!(f, "the database does not entail the query"),
            UnravelError::InvalidWitnessHom { reason } => {
                write!(f, "witness homomorphism rejected: {}", reason)
            }
            UnravelError::Postcondition { point, detail } => {
                write!(f, "construction postcondition ({}) violated: {}", point, detail)
            }
            UnravelError::Rel(e) => write!(f, "{}", e),
            UnravelError::Chase(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for UnravelError {}

impl From<RelError> for UnravelError {
    fn from(e: RelError) -> UnravelError {
        UnravelError::Rel(e)
    }
}

impl From<ChaseError> for UnravelError {
    fn from(e: ChaseError) -> UnravelError {
        UnravelError::Chase(e)
    }
}

use crate::width::TreeDecomposition;

/// A truncated guarded unraveling with its guarded tree decomposition.
#[derive(Clone, Debug)]
pub struct UnravelingResult {
    pub structure: Structure,
    pub decomposition: TreeDecomposition,
    pub root: usize,
    pub depth: usize,
    /// Definitive when the tree was exhausted; otherwise the stabilization
    /// heuristic held at this depth.
    pub stabilized: bool,
    /// Whether the unraveling tree has no nodes beyond `depth`.
    pub exhausted: bool,
    /// Copy constant -> the base-database constant it copies (identity on
    /// the root slice).
    pub original_of: BTreeMap<Constant, Constant>,
}

struct UnravelBuilder<'a> {
    d: &'a Structure,
    max_guarded: Vec<BTreeSet<Constant>>,
    used_names: BTreeSet<Sym>,
    copy_counter: usize,
    // node fields
    tails: Vec<BTreeSet<Constant>>,
    renames: Vec<BTreeMap<Constant, Constant>>,
    parents: Vec<Option<usize>>,
    depths: Vec<usize>,
    facts: BTreeSet<Fact>,
    original_of: BTreeMap<Constant, Constant>,
    frontier: Vec<usize>,
    depth: usize,
}

impl<'a> UnravelBuilder<'a> {
    fn new(d: &'a Structure, root: &BTreeSet<Constant>) -> Result<UnravelBuilder<'a>, UnravelError> {
        if !is_guarded_in(root, d) {
            return Err(UnravelError::NotGuarded);
        }
        let max_guarded = guarded_analysis(d).maximal_guarded_sets;
        let identity: BTreeMap<Constant, Constant> =
            root.iter().map(|c| (c.clone(), c.clone())).collect();
        let slice = d.induced(root);
        let mut original_of = BTreeMap::new();
        for c in root {
            original_of.insert(c.clone(), c.clone());
        }
        Ok(UnravelBuilder {
            d,
            max_guarded,
            used_names: d.domain().into_iter().map(|c| c.name).collect(),
            copy_counter: 1,
            tails: vec![root.clone()],
            renames: vec![identity],
            parents: vec![None],
            depths: vec![0],
            facts: slice.facts().clone(),
            original_of,
            frontier: vec![0],
            depth: 0,
        })
    }

    fn fresh_copy(&mut self, original: &Constant) -> Constant {
        loop {
            let name = Sym::from(format!("{}~{}", original.name, self.copy_counter));
            self.copy_counter += 1;
            if self.used_names.insert(name.clone()) {
                let copy = Constant::with_origin(name, Origin::UnravelCopy);
                self.original_of.insert(copy.clone(), original.clone());
                return copy;
            }
        }
    }

    /// Grow the tree by one level; returns false when nothing was added.
    fn advance(&mut self) -> bool {
        let mut next_frontier = Vec::new();
        for &node in &self.frontier.clone() {
            let tail = self.tails[node].clone();
            for mgs in self.max_guarded.clone() {
                if mgs == tail || mgs.is_disjoint(&tail) {
                    continue;
                }
                let parent_rename = self.renames[node].clone();
                let mut rename: BTreeMap<Constant, Constant> = BTreeMap::new();
                for c in &mgs {
                    let image = match parent_rename.get(c) {
                        Some(copy) if tail.contains(c) => copy.clone(),
                        _ => self.fresh_copy(c),
                    };
                    rename.insert(c.clone(), image);
                }
                for fact in self.d.induced(&mgs).facts() {
                    self.facts.insert(Fact::new(
                        fact.rel.clone(),
                        fact.args.iter().map(|a| rename[a].clone()).collect(),
                    ));
                }
                let id = self.tails.len();
                self.tails.push(mgs.clone());
                self.renames.push(rename);
                self.parents.push(Some(node));
                self.depths.push(self.depth + 1);
                next_frontier.push(id);
            }
        }
        self.depth += 1;
        self.frontier = next_frontier;
        !self.frontier.is_empty()
    }

    /// No node of the current frontier can have children.
    fn is_exhausted(&self) -> bool {
        self.frontier.iter().all(|&n| {
            let tail = &self.tails[n];
            !self
                .max_guarded
                .iter()
                .any(|mgs| mgs != tail && !mgs.is_disjoint(tail))
        })
    }

    fn snapshot(&self) -> Result<Structure, UnravelError> {
        Ok(Structure::new(self.d.schema().clone(), self.facts.clone())?)
    }

    fn result(&self, stabilized: bool, exhausted: bool) -> Result<UnravelingResult, UnravelError> {
        let structure = self.snapshot()?;
        let bags: Vec<BTreeSet<Sym>> = self
            .renames
            .iter()
            .map(|r| r.values().map(|c| c.name.clone()).collect())
            .collect();
        Ok(UnravelingResult {
            structure,
            decomposition: TreeDecomposition {
                bags,
                parent: self.parents.clone(),
            },
            root: 0,
            depth: self.depths.iter().copied().max().unwrap_or(0),
            stabilized,
            exhausted,
            original_of: self.original_of.clone(),
        })
    }
}

/// Sub-queries entailed by the truncation (indices into `subqs`).
fn entailed_set(
    q: &Omq,
    trunc: &Structure,
    subqs: &[Cq],
) -> Result<BTreeSet<usize>, UnravelError> {
    let chase = run_chase(&q.ontology, trunc, None)?;
    Ok(subqs
        .iter()
        .enumerate()
        .filter(|(_, p)| evaluate_cq(p, &chase.structure))
        .map(|(i, _)| i)
        .collect())
}

fn all_subqueries(q: &Omq) -> Vec<Cq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in q.query.disjuncts() {
        for s in subqueries(d) {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out
}

/// The guarded unraveling of `d` at a guarded set, truncated at `depth`.
///
/// With a query given, `stabilized` reports whether the entailed
/// sub-queries agree between `depth` and `depth - 1` and every atomic
/// consequence of `d` on the root set is reproduced; without one it is true
/// only when the tree was exhausted.
pub fn guarded_unraveling(
    d: &Structure,
    root: &BTreeSet<Constant>,
    depth: usize,
    q: Option<&Omq>,
) -> Result<UnravelingResult, UnravelError> {
    let mut b = UnravelBuilder::new(d, root)?;
    let subqs = q.map(all_subqueries);
    let mut prev_entailed: Option<BTreeSet<usize>> = None;
    let mut exhausted = false;
    for level in 1..=depth {
        if level == depth {
            // The builder currently holds the (depth - 1) truncation.
            if let (Some(q), Some(subqs)) = (q, subqs.as_ref()) {
                prev_entailed = Some(entailed_set(q, &b.snapshot()?, subqs)?);
            }
        }
        if !b.advance() {
            exhausted = true;
            break;
        }
    }
    exhausted = exhausted || b.is_exhausted();
    let stabilized = if exhausted {
        true
    } else if let (Some(q), Some(subqs), Some(prev)) = (q, subqs.as_ref(), prev_entailed.as_ref())
    {
        let current = entailed_set(q, &b.snapshot()?, subqs)?;
        prev == &current && atomic_targets_met(q, d, root, &b)?
    } else {
        false
    };
    b.result(stabilized, exhausted)
}

/// Every chase fact of `d` whose arguments lie in the root set must also be
/// a chase fact of the truncation.
fn atomic_targets_met(
    q: &Omq,
    d: &Structure,
    root: &BTreeSet<Constant>,
    b: &UnravelBuilder,
) -> Result<bool, UnravelError> {
    let targets = atomic_consequences(&q.ontology, d, root)?;
    let chase = run_chase(&q.ontology, &b.snapshot()?, None)?;
    Ok(targets.iter().all(|t| chase.structure.contains(t)))
}

/// Grow the unraveling until stabilization, up to `cap` levels.
///
/// The entailed sub-queries must stay unchanged over a window of
/// consecutive depths equal to the number of maximal guarded sets (the
/// period with which subtree shapes repeat), and every atomic consequence
/// of the base on the root set must be reproduced. One depth of agreement
/// is not enough: a fact several overlap-steps away from the root enters
/// the truncation only after a full period.
pub fn stabilized_unraveling(
    d: &Structure,
    root: &BTreeSet<Constant>,
    q: &Omq,
    cap: usize,
) -> Result<UnravelingResult, UnravelError> {
    let subqs = all_subqueries(q);
    let mut b = UnravelBuilder::new(d, root)?;
    let window = b.max_guarded.len().max(1);
    let mut history = vec![entailed_set(q, &b.snapshot()?, &subqs)?];
    for _ in 1..=cap {
        if !b.advance() {
            return b.result(true, true);
        }
        history.push(entailed_set(q, &b.snapshot()?, &subqs)?);
        let stable = history.len() > window
            && history[history.len() - window - 1..]
                .windows(2)
                .all(|w| w[0] == w[1]);
        if stable && atomic_targets_met(q, d, root, &b)? {
            let exhausted = b.is_exhausted();
            return b.result(true, exhausted);
        }
    }
    let exhausted = b.is_exhausted();
    b.result(exhausted, exhausted)
}

/// Memo for stabilized unravelings of one base database under one query and
/// cap; keyed by root set.
#[derive(Default)]
pub struct UnravelCache {
    map: HashMap<Vec<Constant>, Arc<UnravelingResult>>,
}

impl UnravelCache {
    pub fn new() -> UnravelCache {
        UnravelCache::default()
    }

    fn get(
        &mut self,
        d0: &Structure,
        root: &BTreeSet<Constant>,
        q: &Omq,
        cap: usize,
    ) -> Result<Arc<UnravelingResult>, UnravelError> {
        let key: Vec<Constant> = root.iter().cloned().collect();
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(stabilized_unraveling(d0, root, q, cap)?);
        self.map.insert(key, fresh.clone());
        Ok(fresh)
    }
}

/// One glued unraveling copy inside an extension.
#[derive(Clone, Debug)]
pub struct ExtPart {
    /// The maximal guarded set of the base whose unraveling this is.
    pub guarded_set: BTreeSet<Constant>,
    /// Its image in the far database (the unraveling root).
    pub root: BTreeSet<Constant>,
    /// Constants of the copy outside the base database.
    pub fresh: BTreeSet<Constant>,
    pub facts: BTreeSet<Fact>,
    pub depth: usize,
    pub stabilized: bool,
}

/// `d` extended, per maximal guarded set, with a renamed truncated
/// unraveling of `d0` rooted at that set's image.
#[derive(Clone, Debug)]
pub struct Extension {
    pub base: Structure,
    pub result: Structure,
    pub parts: Vec<ExtPart>,
    pub all_stabilized: bool,
}

/// Build the extension of `d` along `up` into `d0`, unraveling `d0` at the
/// image of every maximal guarded set of `d`. `up` must be a homomorphism
/// and injective on guarded sets; it need not be a diversification.
pub fn ext(
    d: &Structure,
    up: &Homomorphism,
    d0: &Structure,
    q: &Omq,
    depth_cap: usize,
    cache: &mut UnravelCache,
) -> Result<Extension, UnravelError> {
    if !up.verify(d, d0) {
        return Err(UnravelError::NotAHomomorphism);
    }
    if !up.is_igs(d) {
        return Err(UnravelError::NotIgs);
    }
    let mut used_names: BTreeSet<Sym> = d.domain().into_iter().map(|c| c.name).collect();
    let mut copy_counter = 1usize;
    let mut parts = Vec::new();
    let mut facts = d.facts().clone();
    let mut all_stabilized = true;
    for ga in guarded_analysis(d).maximal_guarded_sets {
        let root: BTreeSet<Constant> = ga.iter().map(|c| up.apply(c).unwrap().clone()).collect();
        let unravel = cache.get(d0, &root, q, depth_cap)?;
        // Root constants return to their preimages in `ga`; copies get
        // fresh names.
        let mut rename: BTreeMap<Constant, Constant> = BTreeMap::new();
        for c in &ga {
            rename.insert(up.apply(c).unwrap().clone(), c.clone());
        }
        for c in unravel.structure.domain() {
            if rename.contains_key(&c) {
                continue;
            }
            let original = &unravel.original_of[&c];
            let fresh = loop {
                let name = Sym::from(format!("{}~{}", original.name, copy_counter));
                copy_counter += 1;
                if used_names.insert(name.clone()) {
                    break Constant::with_origin(name, Origin::UnravelCopy);
                }
            };
            rename.insert(c, fresh);
        }
        let part_facts: BTreeSet<Fact> = unravel
            .structure
            .facts()
            .iter()
            .map(|f| {
                Fact::new(
                    f.rel.clone(),
                    f.args.iter().map(|a| rename[a].clone()).collect(),
                )
            })
            .collect();
        let fresh: BTreeSet<Constant> = rename
            .values()
            .filter(|c| c.origin == Origin::UnravelCopy)
            .cloned()
            .collect();
        facts.extend(part_facts.iter().cloned());
        all_stabilized &= unravel.stabilized;
        parts.push(ExtPart {
            guarded_set: ga,
            root,
            fresh,
            facts: part_facts,
            depth: unravel.depth,
            stabilized: unravel.stabilized,
        });
    }
    let schema = d.schema().union(d0.schema())?;
    Ok(Extension {
        base: d.clone(),
        result: Structure::new(schema, facts)?,
        parts,
        all_stabilized,
    })
}

/// Convenience wrapper with a private cache.
pub fn ext_once(
    d: &Structure,
    up: &Homomorphism,
    d0: &Structure,
    q: &Omq,
    depth_cap: usize,
) -> Result<Extension, UnravelError> {
    ext(d, up, d0, q, depth_cap, &mut UnravelCache::new())
}

/// Homomorphism, injective on guarded sets, injective on the kernel.
pub fn is_diversification(d: &Structure, up: &Homomorphism, d0: &Structure) -> bool {
    up.verify(d, d0) && up.is_igs(d) && up.injective_on(&guarded_analysis(d).kernel)
}

/// Search for a diversification witness `d -> d0`; complete while the
/// number of homomorphisms stays within `budget`.
pub fn precedes(d: &Structure, d0: &Structure, budget: usize) -> Option<Homomorphism> {
    let homs = find_homomorphisms(d, d0, HomMode::Any, Some(budget)).ok()?;
    let kernel = guarded_analysis(d).kernel;
    homs.into_iter()
        .find(|h| h.is_igs(d) && h.injective_on(&kernel))
}

/// Membership in the set of diversifications whose extension entails the
/// query.
pub fn in_div(
    d: &Structure,
    up: &Homomorphism,
    d0: &Structure,
    q: &Omq,
    depth_cap: usize,
    cache: &mut UnravelCache,
) -> Result<bool, UnravelError> {
    if !is_diversification(d, up, d0) {
        return Err(UnravelError::NotADiversification);
    }
    let extension = ext(d, up, d0, q, depth_cap, cache)?;
    Ok(eval_omq(q, &extension.result, None)? == OmqVerdict::True)
}

/// Verdict of the bounded query-initiality check.
#[derive(Clone, Debug)]
pub enum QiVerdict {
    QiWithinBound {
        bound: usize,
    },
    NotQi {
        witness: Structure,
        contraction: Cq,
        witness_io: bool,
        reference_io: bool,
    },
    Unknown {
        reason: String,
    },
}

impl QiVerdict {
    pub fn is_qi_within_bound(&self) -> bool {
        matches!(self, QiVerdict::QiWithinBound { .. })
    }

    pub fn is_not_qi(&self) -> bool {
        matches!(self, QiVerdict::NotQi { .. })
    }
}

/// Enumerate candidate databases mapping into `target` with at most
/// `max_constants` constants, up to isomorphism, in deterministic order.
///
/// For every function from a fresh constant pool into `dom(target)`, the
/// pull-back structure collects all facts whose image lies in `target`;
/// candidates are exactly the subsets of pull-backs. `viable` prunes whole
/// pull-backs (it must be monotone: unviable pull-backs have no viable
/// subsets). Returns false when some pull-back was too large to enumerate.
fn for_each_candidate(
    target: &Structure,
    max_constants: usize,
    pool_prefix: &str,
    pool_origin: Origin,
    // Deduplicate candidates by structure isomorphism alone, or by
    // isomorphism commuting with the witness map (needed when the pair
    // matters, as for diversifications).
    dedup_with_map: bool,
    viable: &mut dyn FnMut(&Structure) -> Result<bool, UnravelError>,
    visit: &mut dyn FnMut(&Structure, &Homomorphism) -> Result<bool, UnravelError>,
) -> Result<bool, UnravelError> {
    let dom: Vec<Constant> = target.domain().into_iter().collect();
    if dom.is_empty() {
        return Ok(true);
    }
    let pool: Vec<Constant> = (0..max_constants)
        .map(|i| Constant::with_origin(format!("{}{}", pool_prefix, i), pool_origin))
        .collect();
    let mut complete = true;
    let mut seen: HashSet<String> = HashSet::new();
    let mut choice = vec![0usize; pool.len()];
    loop {
        let assignment: BTreeMap<Constant, Constant> = pool
            .iter()
            .cloned()
            .zip(choice.iter().map(|&i| dom[i].clone()))
            .collect();
        // Pull back every target fact along the assignment.
        let mut pull: Vec<Fact> = Vec::new();
        for fact in target.facts() {
            let mut preimages: Vec<Vec<Constant>> = vec![Vec::new()];
            for arg in &fact.args {
                let choices: Vec<&Constant> = pool
                    .iter()
                    .filter(|p| assignment[*p] == *arg)
                    .collect();
                let mut next = Vec::new();
                for partial in &preimages {
                    for c in &choices {
                        let mut tuple = partial.clone();
                        tuple.push((*c).clone());
                        next.push(tuple);
                    }
                }
                preimages = next;
                if preimages.is_empty() {
                    break;
                }
            }
            for tuple in preimages {
                pull.push(Fact::new(fact.rel.clone(), tuple));
            }
        }
        pull.sort();
        pull.dedup();
        let pull_structure = Structure::new(target.schema().clone(), pull.iter().cloned())?;
        if viable(&pull_structure)? {
            if pull.len() > SUBSET_CAP {
                complete = false;
            } else {
                for mask in 1u64..(1u64 << pull.len()) {
                    let subset: Vec<Fact> = pull
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, f)| f.clone())
                        .collect();
                    let candidate = Structure::new(target.schema().clone(), subset)?;
                    let witness = Homomorphism::new(
                        candidate
                            .domain()
                            .into_iter()
                            .map(|c| {
                                let img = assignment[&c].clone();
                                (c, img)
                            })
                            .collect(),
                    );
                    let key = if dedup_with_map {
                        tagged_key(&candidate, &witness)
                    } else {
                        canonical_key(&candidate)
                    };
                    if !seen.insert(key) {
                        continue;
                    }
                    if !visit(&candidate, &witness)? {
                        return Ok(complete);
                    }
                }
            }
        }
        // Next assignment, odometer-style.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(complete);
            }
            choice[i] += 1;
            if choice[i] < dom.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Bounded semi-decision of query-initiality.
///
/// Enumerates every database (up to isomorphism) with at most
/// `candidate_bound` constants that maps into `d` and entails the query,
/// and compares injective-only mappability of every contraction of every
/// disjunct between the candidate's chase and `d`'s chase. The first
/// discrepancy is returned as a counter-witness.
pub fn is_qi_bounded(
    d: &Structure,
    q: &Omq,
    candidate_bound: usize,
) -> Result<QiVerdict, UnravelError> {
    if eval_omq(q, d, None)? != OmqVerdict::True {
        return Err(UnravelError::NotAModel);
    }
    let chase_d = run_chase(&q.ontology, d, None)?.structure;
    let mut contrs: Vec<Cq> = Vec::new();
    let mut seen = BTreeSet::new();
    for disjunct in q.query.disjuncts() {
        for c in contractions(disjunct) {
            if seen.insert(c.clone()) {
                contrs.push(c);
            }
        }
    }
    let reference_io: Vec<bool> = contrs
        .iter()
        .map(|p| crate::chase::io_maps(p, &chase_d))
        .collect();

    let mut verdict: Option<QiVerdict> = None;
    let complete = for_each_candidate(
        d,
        candidate_bound,
        "c",
        Origin::Input,
        false,
        &mut |pull| Ok(eval_omq(q, pull, None)? == OmqVerdict::True),
        &mut |candidate, _| {
            if eval_omq(q, candidate, None)? != OmqVerdict::True {
                return Ok(true);
            }
            let chase_c = run_chase(&q.ontology, candidate, None)?.structure;
            for (i, p) in contrs.iter().enumerate() {
                let io_c = crate::chase::io_maps(p, &chase_c);
                if io_c != reference_io[i] {
                    verdict = Some(QiVerdict::NotQi {
                        witness: candidate.clone(),
                        contraction: p.clone(),
                        witness_io: io_c,
                        reference_io: reference_io[i],
                    });
                    return Ok(false);
                }
            }
            Ok(true)
        },
    )?;
    if let Some(v) = verdict {
        return Ok(v);
    }
    if complete {
        Ok(QiVerdict::QiWithinBound {
            bound: candidate_bound,
        })
    } else {
        Ok(QiVerdict::Unknown {
            reason: "pull-back exceeded the subset enumeration cap".into(),
        })
    }
}

/// A diversification of `base` whose extension entails the query.
#[derive(Clone, Debug)]
pub struct DiversificationWitness {
    pub db: Structure,
    pub up: Homomorphism,
    pub base: Structure,
}

impl DiversificationWitness {
    /// Witness pairs are compared up to a structure isomorphism commuting
    /// with the map into the base.
    pub fn equivalent_to(&self, other: &DiversificationWitness) -> bool {
        tagged_key(&self.db, &self.up) == tagged_key(&other.db, &other.up)
    }
}

/// Canonical key of a (database, map) pair: the database with one extra
/// unary marker fact per constant, naming its image in the base.
fn tagged_key(d: &Structure, up: &Homomorphism) -> String {
    let mut schema_syms: Vec<(Sym, usize)> =
        d.schema().symbols().map(|(s, a)| (s.clone(), a)).collect();
    let mut facts: Vec<Fact> = d.facts().iter().cloned().collect();
    for c in d.domain() {
        if let Some(img) = up.apply(&c) {
            let marker = Sym::from(format!("@to_{}", img.name));
            schema_syms.push((marker.clone(), 1));
            facts.push(Fact::new(marker, vec![c.clone()]));
        }
    }
    let schema = crate::relstruct::Schema::new(schema_syms).expect("marker arities consistent");
    let tagged = Structure::new(schema, facts).expect("tagged facts conform");
    canonical_key(&tagged)
}

/// Search report: all members found plus whether the search space was
/// covered completely.
#[derive(Clone, Debug)]
pub struct MdivReport {
    pub members: Vec<DiversificationWitness>,
    pub complete: bool,
}

/// All minimal diversifications of `d0` with at most `domain_budget`
/// constants: members of the diversification set that are cores and
/// preorder-minimal relative to the searched space, in canonical order.
pub fn minimal_diversifications_bounded(
    d0: &Structure,
    q: &Omq,
    domain_budget: usize,
    depth_cap: usize,
) -> Result<MdivReport, UnravelError> {
    if eval_omq(q, d0, None)? != OmqVerdict::True {
        return Err(UnravelError::NotAModel);
    }
    let mut cache = UnravelCache::new();
    let mut members: Vec<DiversificationWitness> = Vec::new();
    let complete = for_each_candidate(
        d0,
        domain_budget,
        "f",
        Origin::FreshDiversify,
        true,
        &mut |_pull| Ok(true),
        &mut |candidate, witness| {
            if !is_diversification(candidate, witness, d0) {
                return Ok(true);
            }
            if !in_div(candidate, witness, d0, q, depth_cap, &mut cache)? {
                return Ok(true);
            }
            members.push(DiversificationWitness {
                db: candidate.clone(),
                up: witness.clone(),
                base: d0.clone(),
            });
            Ok(true)
        },
    )?;

    // Keep cores only.
    members.retain(|m| {
        let (core, _) = core_of(&m.db);
        core.domain().len() == m.db.domain().len()
    });
    // Constructive pruning: for every query witness into the chase of a
    // member's extension, the diversification built from that witness is
    // itself in the diversification set; when it strictly precedes the
    // member, the member is provably non-minimal even if the eliminator
    // has more constants than the search budget.
    let budget = 100_000;
    let mut kept: Vec<DiversificationWitness> = Vec::new();
    'member: for m in members {
        let extension = ext(&m.db, &m.up, d0, q, depth_cap, &mut cache)?;
        let chase = run_chase(&q.ontology, &extension.result, None)?;
        for p in q.query.disjuncts() {
            let homs = find_homomorphisms(
                &p.canonical_db(),
                &chase.structure,
                HomMode::Any,
                None,
            )?;
            for h in homs {
                let Ok((eliminator, _)) =
                    diversify_from_hom(q, &extension, &m.up, d0, p, &h, depth_cap)
                else {
                    continue;
                };
                if precedes(&eliminator, &m.db, budget).is_some()
                    && precedes(&m.db, &eliminator, budget).is_none()
                {
                    continue 'member;
                }
            }
        }
        kept.push(m);
    }
    let members = kept;
    // Preorder minimality within the searched space.
    let mut minimal: Vec<DiversificationWitness> = Vec::new();
    'outer: for (i, m) in members.iter().enumerate() {
        for (j, other) in members.iter().enumerate() {
            if i == j {
                continue;
            }
            let other_below = precedes(&other.db, &m.db, budget).is_some();
            let m_below = precedes(&m.db, &other.db, budget).is_some();
            if other_below && !m_below {
                continue 'outer;
            }
        }
        minimal.push(m.clone());
    }
    minimal.sort_by_key(|m| tagged_key(&m.db, &m.up));
    minimal.dedup_by(|a, b| a.equivalent_to(b));
    Ok(MdivReport {
        members: minimal,
        complete,
    })
}

/// The diversification-from-witness construction.
///
/// Given a homomorphism `h` from a disjunct `p` into the chase of an
/// extension, builds a database `down_db` and a map `down` such that:
/// (1) `down` is the identity on the kernel of `down_db`;
/// (2) `(down_db, down)` is a diversification of the extension's base;
/// (3) the kernel of `down_db` sits inside `ran(h)` intersected with the
///     base's domain;
/// (4) extending `down_db` along `up . down` still entails the query.
/// All four points are checked before returning.
pub fn diversify_from_hom(
    q: &Omq,
    extension: &Extension,
    up: &Homomorphism,
    d0: &Structure,
    p: &Cq,
    h: &Homomorphism,
    depth_cap: usize,
) -> Result<(Structure, Homomorphism), UnravelError> {
    let d = &extension.base;
    let chase = run_chase(&q.ontology, &extension.result, None)?;
    if !h.verify(&p.canonical_db(), &chase.structure) {
        return Err(UnravelError::InvalidWitnessHom {
            reason: "not a homomorphism from the disjunct into the chase".into(),
        });
    }
    let ran_h: BTreeSet<Constant> = h.range();
    let d_domain = d.domain();

    // Which extension parts are hit by variables mapping outside the base.
    let mut used_parts: Vec<usize> = Vec::new();
    for value in &ran_h {
        if d_domain.contains(value) {
            continue;
        }
        let part = extension
            .parts
            .iter()
            .position(|pt| pt.fresh.contains(value))
            .ok_or_else(|| UnravelError::InvalidWitnessHom {
                reason: format!("image constant {} belongs to no extension part", value),
            })?;
        if !used_parts.contains(&part) {
            used_parts.push(part);
        }
    }
    used_parts.sort_unstable();

    let mut used_names: BTreeSet<Sym> = d_domain.iter().map(|c| c.name.clone()).collect();
    used_names.extend(ran_h.iter().map(|c| c.name.clone()));
    let mut fresh_counter = 0usize;
    let mut down_map: BTreeMap<Constant, Constant> = BTreeMap::new();
    let mut fresh_for = |original: &Constant,
                         used_names: &mut BTreeSet<Sym>,
                         down_map: &mut BTreeMap<Constant, Constant>|
     -> Constant {
        loop {
            let name = Sym::from(format!("f{}", fresh_counter));
            fresh_counter += 1;
            if used_names.insert(name.clone()) {
                let c = Constant::with_origin(name, Origin::FreshDiversify);
                down_map.insert(c.clone(), original.clone());
                return c;
            }
        }
    };

    let mut facts: BTreeSet<Fact> = BTreeSet::new();
    // Facts of the base touching the witness range, with untouched
    // constants renamed apart per fact.
    for fact in d.facts() {
        if fact.args.iter().all(|a| !ran_h.contains(a)) {
            continue;
        }
        let mut per_fact: BTreeMap<Constant, Constant> = BTreeMap::new();
        let args: Vec<Constant> = fact
            .args
            .iter()
            .map(|a| {
                if ran_h.contains(a) {
                    down_map.insert(a.clone(), a.clone());
                    a.clone()
                } else {
                    per_fact
                        .entry(a.clone())
                        .or_insert_with(|| fresh_for(a, &mut used_names, &mut down_map))
                        .clone()
                }
            })
            .collect();
        facts.insert(Fact::new(fact.rel.clone(), args));
    }
    // One guard fact per used part, with unseen root constants renamed
    // apart so different parts stay disjoint.
    for part_idx in used_parts {
        let part = &extension.parts[part_idx];
        let guard = d
            .facts()
            .iter()
            .find(|f| part.guarded_set.is_subset(&f.arg_set()))
            .expect("maximal guarded sets are witnessed by a fact");
        let mut part_map: BTreeMap<Constant, Constant> = BTreeMap::new();
        let args: Vec<Constant> = guard
            .args
            .iter()
            .map(|a| {
                if ran_h.contains(a) {
                    down_map.insert(a.clone(), a.clone());
                    a.clone()
                } else {
                    part_map
                        .entry(a.clone())
                        .or_insert_with(|| fresh_for(a, &mut used_names, &mut down_map))
                        .clone()
                }
            })
            .collect();
        facts.insert(Fact::new(guard.rel.clone(), args));
    }

    let down_db = Structure::new(d.schema().clone(), facts)?;
    let down = Homomorphism::new(
        down_db
            .domain()
            .into_iter()
            .map(|c| {
                let img = down_map[&c].clone();
                (c, img)
            })
            .collect(),
    );

    // Point (1): identity on the kernel.
    let kernel = guarded_analysis(&down_db).kernel;
    for k in &kernel {
        if down.apply(k) != Some(k) {
            return Err(UnravelError::Postcondition {
                point: 1,
                detail: format!("kernel constant {} not fixed", k),
            });
        }
    }
    // Point (2): diversification of the base.
    if !is_diversification(&down_db, &down, d) {
        return Err(UnravelError::Postcondition {
            point: 2,
            detail: "(down_db, down) is not a diversification of the base".into(),
        });
    }
    // Point (3): kernel inside ran(h) and the base domain.
    for k in &kernel {
        if !ran_h.contains(k) || !d_domain.contains(k) {
            return Err(UnravelError::Postcondition {
                point: 3,
                detail: format!("kernel constant {} escapes ran(h) over the base", k),
            });
        }
    }
    // Point (4): the re-extended database still entails the query.
    let composed = down.then(up);
    let re_extended = ext_once(&down_db, &composed, d0, q, depth_cap)?;
    if eval_omq(q, &re_extended.result, None)? != OmqVerdict::True {
        return Err(UnravelError::Postcondition {
            point: 4,
            detail: "re-extended database does not entail the query".into(),
        });
    }
    Ok((down_db, down))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(names: &[&str]) -> BTreeSet<Constant> {
        names.iter().map(|n| fixtures::con(n)).collect()
    }

    #[test]
    fn unraveling_depth_zero_is_root_slice() {
        let ex = fixtures::triangle_example();
        let root = set(&["a", "c"]);
        let u = guarded_unraveling(&ex.d2, &root, 0, None).unwrap();
        assert_eq!(u.structure, ex.d2.induced(&root));
        assert_eq!(
            u.decomposition.bags[u.root],
            root.iter().map(|c| c.name.clone()).collect()
        );
    }

    #[test]
    fn unraveling_rejects_unguarded_roots() {
        let ex = fixtures::triangle_example();
        let bad = set(&["a", "b", "c"]);
        assert!(matches!(
            guarded_unraveling(&ex.d2, &bad, 1, None),
            Err(UnravelError::NotGuarded)
        ));
    }

    #[test]
    fn unraveling_contains_fresh_ternary_copy() {
        // Unraveling at the {a,c} guard set regenerates the ternary fact
        // with a fresh copy of its middle constant.
        let ex = fixtures::triangle_example();
        let root = set(&["a", "c"]);
        let u = guarded_unraveling(&ex.d2, &root, 2, Some(&ex.omq)).unwrap();
        let has_u_copy = u.structure.facts().iter().any(|f| {
            f.rel.as_str() == "U"
                && f.args[0] == fixtures::con("c")
                && f.args[2] == fixtures::con("a")
                && f.args[1].origin == Origin::UnravelCopy
        });
        assert!(has_u_copy, "expected U(c, d', a) in {:?}", u.structure);
    }

    #[test]
    fn unraveling_decomposition_is_guarded_and_valid() {
        let ex = fixtures::triangle_example();
        let root = set(&["a", "c"]);
        let u = guarded_unraveling(&ex.d2, &root, 3, Some(&ex.omq)).unwrap();
        let h = crate::width::hypergraph_of_structure(&u.structure);
        assert!(u.decomposition.is_valid_for(&h));
        // Every bag is a guarded set of the unraveling.
        for bag in &u.decomposition.bags {
            let as_constants: BTreeSet<Constant> = u
                .structure
                .domain()
                .into_iter()
                .filter(|c| bag.contains(&c.name))
                .collect();
            assert_eq!(as_constants.len(), bag.len());
            assert!(is_guarded_in(&as_constants, &u.structure));
        }
    }

    #[test]
    fn stabilized_unraveling_preserves_atomic_consequences() {
        let ex = fixtures::triangle_example();
        let root = set(&["a", "c"]);
        let u = stabilized_unraveling(&ex.d2, &root, &ex.omq, 8).unwrap();
        assert!(u.stabilized);
        let targets = atomic_consequences(&ex.omq.ontology, &ex.d2, &root).unwrap();
        let chase = run_chase(&ex.omq.ontology, &u.structure, None).unwrap();
        for t in &targets {
            assert!(chase.structure.contains(t), "missing {}", t);
        }
    }

    #[test]
    fn base_with_full_guard_unravels_to_itself() {
        let ex = fixtures::clique_example(3);
        let root: BTreeSet<Constant> = ex.guard_db.domain();
        let u = stabilized_unraveling(&ex.base_db, &root, &ex.omq, 4).unwrap();
        assert!(u.exhausted);
        assert_eq!(u.structure, ex.base_db);
    }

    #[test]
    fn ext_of_sub_database_entails_query() {
        let ex = fixtures::triangle_example();
        let up = fixtures::identity(&ex.divers_db);
        let e = ext_once(&ex.divers_db, &up, &ex.d2, &ex.omq, 6).unwrap();
        assert!(ex.divers_db.is_subset_of(&e.result));
        // The glued copy of the ternary fact re-enables the triangle.
        assert_eq!(eval_omq(&ex.omq, &e.result, None).unwrap(), OmqVerdict::True);
    }

    #[test]
    fn ext_of_clique_guard_restores_base() {
        let ex = fixtures::clique_example(3);
        let up = fixtures::identity(&ex.guard_db);
        let e = ext_once(&ex.guard_db, &up, &ex.base_db, &ex.omq, 4).unwrap();
        assert!(ex.base_db.is_subset_of(&e.result));
        assert_eq!(e.result, ex.base_db);
    }

    #[test]
    fn ext_of_empty_base_is_empty() {
        let ex = fixtures::triangle_example();
        let empty = Structure::empty(ex.d2.schema().clone());
        let up = Homomorphism::new(BTreeMap::new());
        let e = ext_once(&empty, &up, &ex.d2, &ex.omq, 4).unwrap();
        assert!(e.result.is_empty());
    }

    #[test]
    fn diversification_checks() {
        let ex = fixtures::triangle_example();
        let id = fixtures::identity(&ex.divers_db);
        assert!(is_diversification(&ex.divers_db, &id, &ex.d2));
        // Any sub-database with the identity is a diversification.
        let sub = fixtures::structure(&[("R", &["a", "b"])]);
        assert!(is_diversification(&sub, &fixtures::identity(&sub), &ex.d2));
        // Collapsing two kernel constants is not.
        let collapse = fixtures::hom(&[("a", "a"), ("b", "a"), ("c", "c"), ("d", "d")]);
        assert!(!is_diversification(&ex.divers_db, &collapse, &ex.d2));
    }

    #[test]
    fn precedes_reflexive_and_witnessed() {
        let ex = fixtures::triangle_example();
        let w = precedes(&ex.divers_db, &ex.divers_db, 10_000).unwrap();
        assert!(is_diversification(&ex.divers_db, &w, &ex.divers_db));
        let w = precedes(&ex.divers_db, &ex.d2, 10_000).unwrap();
        assert!(is_diversification(&ex.divers_db, &w, &ex.d2));
    }

    #[test]
    fn precedes_composes_transitively() {
        let ex = fixtures::triangle_example();
        let small = fixtures::structure(&[("R", &["a", "b"])]);
        let w1 = precedes(&small, &ex.divers_db, 10_000).unwrap();
        let w2 = precedes(&ex.divers_db, &ex.d2, 10_000).unwrap();
        let composed = w1.then(&w2);
        assert!(is_diversification(&small, &composed, &ex.d2));
    }

    #[test]
    fn in_div_examples() {
        let ex = fixtures::triangle_example();
        let mut cache = UnravelCache::new();
        let id = fixtures::identity(&ex.divers_db);
        assert!(in_div(&ex.divers_db, &id, &ex.d2, &ex.omq, 6, &mut cache).unwrap());
        // The base itself is always in its own diversification set when it
        // entails the query.
        let id0 = fixtures::identity(&ex.d2);
        assert!(in_div(&ex.d2, &id0, &ex.d2, &ex.omq, 6, &mut cache).unwrap());
        // The empty database never is, for a nontrivial query.
        let empty = Structure::empty(ex.d2.schema().clone());
        let up = Homomorphism::new(BTreeMap::new());
        assert!(!in_div(&empty, &up, &ex.d2, &ex.omq, 6, &mut cache).unwrap());
    }

    #[test]
    fn qi_verdicts_for_triangle_databases() {
        let ex = fixtures::triangle_example();
        let v1 = is_qi_bounded(&ex.d1, &ex.omq, 4).unwrap();
        match &v1 {
            QiVerdict::NotQi {
                witness,
                contraction,
                witness_io,
                reference_io,
            } => {
                // The witness must map into d1, entail the query, and
                // genuinely disagree on some contraction.
                assert!(crate::relstruct::hom_exists(witness, &ex.d1));
                assert_eq!(eval_omq(&ex.omq, witness, None).unwrap(), OmqVerdict::True);
                assert_ne!(witness_io, reference_io);
                let chase_w = run_chase(&ex.omq.ontology, witness, None).unwrap().structure;
                let chase_d1 = run_chase(&ex.omq.ontology, &ex.d1, None).unwrap().structure;
                assert_eq!(crate::chase::io_maps(contraction, &chase_w), *witness_io);
                assert_eq!(crate::chase::io_maps(contraction, &chase_d1), *reference_io);
            }
            other => panic!("expected a non-initial verdict, got {:?}", other),
        }
        let v2 = is_qi_bounded(&ex.d2, &ex.omq, 4).unwrap();
        assert!(v2.is_qi_within_bound(), "got {:?}", v2);
    }

    #[test]
    fn qi_split_for_equivalent_pair() {
        let pair = fixtures::equivalent_pair_example();
        let v1 = is_qi_bounded(&pair.loop_db, &pair.q1, 3).unwrap();
        assert!(v1.is_qi_within_bound(), "got {:?}", v1);
        let v2 = is_qi_bounded(&pair.loop_db, &pair.q2, 3).unwrap();
        assert!(v2.is_not_qi(), "got {:?}", v2);
    }

    #[test]
    fn qi_requires_entailment() {
        let ex = fixtures::triangle_example();
        let sub = fixtures::structure(&[("R", &["a", "b"])]);
        assert!(matches!(
            is_qi_bounded(&sub, &ex.omq, 3),
            Err(UnravelError::NotAModel)
        ));
    }

    #[test]
    fn mdiv_finds_clique_guard() {
        let ex = fixtures::clique_example(3);
        let report =
            minimal_diversifications_bounded(&ex.base_db, &ex.omq, 3, 4).unwrap();
        assert!(report.complete);
        let expected = DiversificationWitness {
            db: ex.guard_db.clone(),
            up: fixtures::identity(&ex.guard_db),
            base: ex.base_db.clone(),
        };
        assert!(
            report
                .members
                .iter()
                .any(|m| crate::relstruct::isomorphic(&m.db, &expected.db)),
            "members: {:?}",
            report.members.iter().map(|m| &m.db).collect::<Vec<_>>()
        );
    }

    #[test]
    fn mdiv_on_triangle_base_contains_witness_db() {
        let ex = fixtures::triangle_example();
        let report = minimal_diversifications_bounded(&ex.d2, &ex.omq, 4, 6).unwrap();
        assert!(
            report
                .members
                .iter()
                .any(|m| crate::relstruct::isomorphic(&m.db, &ex.divers_db)),
            "members: {:?}",
            report.members.iter().map(|m| &m.db).collect::<Vec<_>>()
        );
    }

    #[test]
    fn mdiv_single_edge() {
        let d0 = fixtures::structure(&[("R", &["a", "b"])]);
        let q = Omq::new(
            crate::chase::Ontology::empty(),
            d0.schema().clone(),
            crate::query::Ucq::single(fixtures::cq(&[("R", &["x", "y"])])),
        )
        .unwrap();
        let report = minimal_diversifications_bounded(&d0, &q, 2, 2).unwrap();
        assert!(report.complete);
        assert_eq!(report.members.len(), 1);
        assert!(crate::relstruct::isomorphic(&report.members[0].db, &d0));
    }

    #[test]
    fn diversify_from_hom_triangle_witness() {
        let ex = fixtures::triangle_example();
        let up = fixtures::identity(&ex.divers_db);
        let e = ext_once(&ex.divers_db, &up, &ex.d2, &ex.omq, 6).unwrap();
        let chase = run_chase(&ex.omq.ontology, &e.result, None).unwrap();
        let p = &ex.omq.query.disjuncts()[0];
        let h = crate::query::evaluate_cq_witness(p, &chase.structure).unwrap();
        let (down_db, down) =
            diversify_from_hom(&ex.omq, &e, &up, &ex.d2, p, &h, 6).unwrap();
        let kernel = guarded_analysis(&down_db).kernel;
        for k in &kernel {
            assert!(ex.divers_db.domain().contains(k));
            assert_eq!(down.apply(k), Some(k));
        }
    }

    #[test]
    fn diversify_from_hom_full_range_degenerates_to_identity_copy() {
        // A homomorphism hitting every base constant with every fact kept
        // reproduces the base up to isomorphism.
        let ex = fixtures::clique_example(2);
        let up = fixtures::identity(&ex.guard_db);
        let e = ext_once(&ex.guard_db, &up, &ex.base_db, &ex.omq, 4).unwrap();
        let chase = run_chase(&ex.omq.ontology, &e.result, None).unwrap();
        let p = &ex.omq.query.disjuncts()[0];
        let h = crate::query::evaluate_cq_witness(p, &chase.structure).unwrap();
        let (down_db, down) =
            diversify_from_hom(&ex.omq, &e, &up, &ex.base_db, p, &h, 4).unwrap();
        assert!(crate::relstruct::isomorphic(&down_db, &ex.guard_db));
        assert!(down.map().iter().all(|(k, v)| k == v));
    }

    /// A three-hop chain: the query's fact sits two overlap steps from
    /// the root, so single-depth agreement is a false fixpoint.
    fn chain_setup() -> (Structure, Omq) {
        let d0 = fixtures::structure(&[
            ("E", &["a", "b"]),
            ("G", &["b", "c"]),
            ("F", &["c", "d"]),
        ]);
        let q = Omq::new(
            crate::chase::Ontology::empty(),
            d0.schema().clone(),
            crate::query::Ucq::single(fixtures::cq(&[("F", &["x", "y"])])),
        )
        .unwrap();
        (d0, q)
    }

    #[test]
    fn stabilization_survives_entailment_plateaus() {
        let (d0, q) = chain_setup();
        let root = set(&["a", "b"]);
        let u = stabilized_unraveling(&d0, &root, &q, 8).unwrap();
        assert!(u.stabilized);
        assert!(
            u.structure.facts().iter().any(|f| f.rel.as_str() == "F"),
            "the far fact must reach the truncation: {:?}",
            u.structure
        );
        assert_eq!(
            eval_omq(&q, &u.structure, None).unwrap(),
            OmqVerdict::True
        );
    }

    #[test]
    fn diversify_from_hom_inside_one_copy_gives_empty_kernel() {
        let (d0, q) = chain_setup();
        let d = fixtures::structure(&[("E", &["a", "b"])]);
        let d = Structure::new(d0.schema().clone(), d.facts().iter().cloned()).unwrap();
        let up = fixtures::identity(&d);
        let e = ext_once(&d, &up, &d0, &q, 8).unwrap();
        let chase = run_chase(&q.ontology, &e.result, None).unwrap();
        let p = &q.query.disjuncts()[0];
        let h = crate::query::evaluate_cq_witness(p, &chase.structure).unwrap();
        // The witness lands entirely in unraveling copies.
        assert!(h.range().iter().all(|c| !d.domain().contains(c)));
        let (down_db, _down) = diversify_from_hom(&q, &e, &up, &d0, p, &h, 8).unwrap();
        assert!(guarded_analysis(&down_db).kernel.is_empty());
        assert_eq!(down_db.len(), 1);
    }

    #[test]
    fn diversify_from_hom_rejects_bogus_witness() {
        let ex = fixtures::triangle_example();
        let up = fixtures::identity(&ex.divers_db);
        let e = ext_once(&ex.divers_db, &up, &ex.d2, &ex.omq, 6).unwrap();
        let p = &ex.omq.query.disjuncts()[0];
        let bogus = fixtures::hom(&[("x", "a"), ("y", "a"), ("z", "a")]);
        assert!(matches!(
            diversify_from_hom(&ex.omq, &e, &up, &ex.d2, p, &bogus, 6),
            Err(UnravelError::InvalidWitnessHom { .. })
        ));
    }
}
