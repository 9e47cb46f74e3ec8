//! Tuple-generating dependencies, guardedness classification, the oblivious
//! chase, and OMQ evaluation.
//!
//! For guarded Datalog the chase is a least fixpoint computed semi-naively:
//! a rule fires only when at least one body atom matches a fact from the
//! previous round's delta. Rules with existential head variables get a
//! bounded-depth chase with deterministically named fresh nulls; evaluation
//! over a truncated chase is sound for positive answers and three-valued
//! otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::query::{evaluate_cq_witness, Atom, Cq, QueryError, Ucq};
use crate::relstruct::{Constant, Fact, Homomorphism, Origin, RelError, Schema, Structure, Sym};

/// A rule `body -> exists z. head`; universally quantified variables are
/// exactly the body variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tgd {
    body: Vec<Atom>,
    head: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChaseError {
    EmptyRule,
    Rel(RelError),
    Query(QueryError),
    BudgetRequired,
    NotDatalog,
    SchemaViolation { fact: String },
}

impl fmt::Display for ChaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChaseError::EmptyRule => write!(f, "rules need a nonempty body and head"),
            ChaseError::Rel(e) => write!(f, "{}", e),
            ChaseError::Query(e) => write!(f, "{}", e),
            ChaseError::BudgetRequired => {
                write!(f, "a depth budget is required outside guarded Datalog")
            }
            ChaseError::NotDatalog => {
                write!(f, "operation requires a guarded Datalog ontology")
            }
            ChaseError::SchemaViolation { fact } => {
                write!(f, "database fact {} is outside the data schema", fact)
            }
        }
    }
}

impl std::error::Error for ChaseError {}

impl From<RelError> for ChaseError {
    fn from(e: RelError) -> ChaseError {
        ChaseError::Rel(e)
    }
}

impl From<QueryError> for ChaseError {
    fn from(e: QueryError) -> ChaseError {
        ChaseError::Query(e)
    }
}

/// Per-rule classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TgdClass {
    /// Some body atom contains every universal variable and the head has no
    /// existential variables.
    DatalogGuarded { guard: Atom },
    /// Some body atom contains every universal variable.
    Guarded { guard: Atom },
    Unguarded,
}

impl Tgd {
    pub fn new(body: Vec<Atom>, head: Vec<Atom>) -> Result<Tgd, ChaseError> {
        if body.is_empty() || head.is_empty() {
            return Err(ChaseError::EmptyRule);
        }
        // Arity consistency across the whole rule.
        Schema::new(
            body.iter()
                .chain(head.iter())
                .map(|a| (a.rel.clone(), a.args.len())),
        )?;
        Ok(Tgd { body, head })
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &[Atom] {
        &self.head
    }

    pub fn universal_vars(&self) -> BTreeSet<Sym> {
        self.body.iter().flat_map(|a| a.vars()).collect()
    }

    pub fn existential_vars(&self) -> BTreeSet<Sym> {
        let universal = self.universal_vars();
        self.head
            .iter()
            .flat_map(|a| a.vars())
            .filter(|v| !universal.contains(v))
            .collect()
    }

    /// Frontier: body variables that also occur in the head.
    pub fn frontier(&self) -> BTreeSet<Sym> {
        let universal = self.universal_vars();
        self.head
            .iter()
            .flat_map(|a| a.vars())
            .filter(|v| universal.contains(v))
            .collect()
    }

    pub fn classify(&self) -> TgdClass {
        let universal = self.universal_vars();
        let guard = self
            .body
            .iter()
            .filter(|a| universal.is_subset(&a.vars()))
            .min();
        match guard {
            None => TgdClass::Unguarded,
            Some(g) if self.existential_vars().is_empty() => TgdClass::DatalogGuarded {
                guard: g.clone(),
            },
            Some(g) => TgdClass::Guarded { guard: g.clone() },
        }
    }

    pub fn schema(&self) -> Schema {
        Schema::new(
            self.body
                .iter()
                .chain(self.head.iter())
                .map(|a| (a.rel.clone(), a.args.len())),
        )
        .expect("validated at construction")
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, " -> ")?;
        let ex = self.existential_vars();
        if !ex.is_empty() {
            write!(f, "exists ")?;
            for (i, v) in ex.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", v)?;
            }
            write!(f, ": ")?;
        }
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OntologyClass {
    /// All rules datalog-guarded.
    GdLog,
    /// All rules guarded, some with existential variables.
    Gtgd,
    Unrestricted,
}

impl fmt::Display for OntologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OntologyClass::GdLog => write!(f, "GDLog"),
            OntologyClass::Gtgd => write!(f, "GTGD"),
            OntologyClass::Unrestricted => write!(f, "unrestricted"),
        }
    }
}

/// A finite set of rules with its computed classification. Rule order is
/// preserved: the chase uses it to name fresh nulls deterministically.
#[derive(Clone, PartialEq, Eq)]
pub struct Ontology {
    rules: Vec<Tgd>,
    class: OntologyClass,
}

impl Ontology {
    pub fn new(rules: Vec<Tgd>) -> Ontology {
        let mut class = OntologyClass::GdLog;
        for r in &rules {
            match r.classify() {
                TgdClass::DatalogGuarded { .. } => {}
                TgdClass::Guarded { .. } => {
                    if class == OntologyClass::GdLog {
                        class = OntologyClass::Gtgd;
                    }
                }
                TgdClass::Unguarded => class = OntologyClass::Unrestricted,
            }
        }
        Ontology { rules, class }
    }

    pub fn empty() -> Ontology {
        Ontology::new(Vec::new())
    }

    pub fn rules(&self) -> &[Tgd] {
        &self.rules
    }

    pub fn class(&self) -> OntologyClass {
        self.class
    }

    pub fn is_gdlog(&self) -> bool {
        self.class == OntologyClass::GdLog
    }

    pub fn schema(&self) -> Schema {
        self.rules
            .iter()
            .fold(Schema::default(), |acc, r| {
                acc.union(&r.schema()).expect("validated at construction")
            })
    }
}

impl fmt::Debug for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.class)?;
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", r)?;
        }
        Ok(())
    }
}

/// An ontology-mediated query: ontology, data schema, Boolean UCQ.
///
/// The data schema restricts databases, not the query or rules: a query may
/// use symbols that no database is allowed to contain.
#[derive(Clone, PartialEq, Eq)]
pub struct Omq {
    pub ontology: Ontology,
    pub data_schema: Schema,
    pub query: Ucq,
}

impl Omq {
    pub fn new(ontology: Ontology, data_schema: Schema, query: Ucq) -> Result<Omq, ChaseError> {
        // All three parts must agree on arities.
        data_schema
            .union(&ontology.schema())?
            .union(&query.schema())?;
        Ok(Omq {
            ontology,
            data_schema,
            query,
        })
    }

    /// Check that a database only uses data-schema symbols.
    pub fn check_database(&self, d: &Structure) -> Result<(), ChaseError> {
        for f in d.facts() {
            if self.data_schema.arity(f.rel.as_str()) != Some(f.args.len()) {
                return Err(ChaseError::SchemaViolation {
                    fact: f.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Omq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {{", self.ontology)?;
        for (i, (s, a)) in self.data_schema.symbols().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}/{}", s, a)?;
        }
        write!(f, "}}, {:?})", self.query)
    }
}

/// The result of a chase run: the saturated (or truncated) structure,
/// the first derivation level of every fact, and a completeness flag.
/// `rounds` is the deepest populated derivation level.
#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub structure: Structure,
    pub levels: BTreeMap<Fact, usize>,
    pub complete: bool,
    pub rounds: usize,
}

/// Runs the oblivious chase.
///
/// Guarded Datalog reaches its least fixpoint and needs no budget; any
/// ontology with existential or unguarded rules requires `depth_budget`,
/// and the result is complete only if a fixpoint was reached within it.
pub fn run_chase(
    ontology: &Ontology,
    d: &Structure,
    depth_budget: Option<usize>,
) -> Result<ChaseResult, ChaseError> {
    if !ontology.is_gdlog() && depth_budget.is_none() {
        return Err(ChaseError::BudgetRequired);
    }
    let schema = d.schema().union(&ontology.schema())?;
    let mut facts: BTreeSet<Fact> = d.facts().clone();
    let mut levels: BTreeMap<Fact, usize> = facts.iter().map(|f| (f.clone(), 0)).collect();
    let mut delta: BTreeSet<Fact> = facts.clone();
    let mut null_counter = 0usize;
    let used_names: BTreeSet<Sym> = d.domain().into_iter().map(|c| c.name).collect();
    let mut round = 0usize;
    let mut complete = false;
    loop {
        if delta.is_empty() {
            complete = true;
            break;
        }
        if let Some(budget) = depth_budget {
            if round >= budget {
                break;
            }
        }
        round += 1;
        let mut new_facts: BTreeSet<Fact> = BTreeSet::new();
        for rule in ontology.rules() {
            let mut bindings = match_body_with_delta(rule.body(), &facts, &delta);
            bindings.sort();
            bindings.dedup();
            for binding in bindings {
                let mut assignment: BTreeMap<Sym, Constant> = binding;
                for z in rule.existential_vars() {
                    let name = loop {
                        let candidate = Sym::from(format!("n{}", null_counter));
                        null_counter += 1;
                        if !used_names.contains(&candidate) {
                            break candidate;
                        }
                    };
                    assignment.insert(z, Constant::with_origin(name, Origin::ChaseNull));
                }
                for atom in rule.head() {
                    let fact = Fact::new(
                        atom.rel.clone(),
                        atom.args
                            .iter()
                            .map(|v| assignment[v].clone())
                            .collect(),
                    );
                    if !facts.contains(&fact) {
                        new_facts.insert(fact);
                    }
                }
            }
        }
        for f in &new_facts {
            levels.entry(f.clone()).or_insert(round);
        }
        facts.extend(new_facts.iter().cloned());
        delta = new_facts;
    }
    let depth_reached = levels.values().copied().max().unwrap_or(0);
    Ok(ChaseResult {
        structure: Structure::new(schema, facts)?,
        levels,
        complete,
        rounds: depth_reached,
    })
}

/// All homomorphisms from `body` into `facts` that send at least one atom
/// into `delta`, as variable bindings.
fn match_body_with_delta(
    body: &[Atom],
    facts: &BTreeSet<Fact>,
    delta: &BTreeSet<Fact>,
) -> Vec<BTreeMap<Sym, Constant>> {
    let mut by_rel: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
    for f in facts {
        by_rel.entry(f.rel.as_str()).or_default().push(f);
    }
    let mut delta_by_rel: BTreeMap<&str, Vec<&Fact>> = BTreeMap::new();
    for f in delta {
        delta_by_rel.entry(f.rel.as_str()).or_default().push(f);
    }
    let mut out = Vec::new();
    // Semi-naive decomposition: pin body atom `pivot` to the delta.
    for pivot in 0..body.len() {
        let mut binding: BTreeMap<Sym, Constant> = BTreeMap::new();
        extend_binding(
            body,
            0,
            pivot,
            &by_rel,
            &delta_by_rel,
            &mut binding,
            &mut out,
        );
    }
    out
}

fn extend_binding(
    body: &[Atom],
    idx: usize,
    pivot: usize,
    by_rel: &BTreeMap<&str, Vec<&Fact>>,
    delta_by_rel: &BTreeMap<&str, Vec<&Fact>>,
    binding: &mut BTreeMap<Sym, Constant>,
    out: &mut Vec<BTreeMap<Sym, Constant>>,
) {
    if idx == body.len() {
        out.push(binding.clone());
        return;
    }
    let atom = &body[idx];
    let source = if idx == pivot { delta_by_rel } else { by_rel };
    for candidate in source.get(atom.rel.as_str()).into_iter().flatten() {
        let mut added: Vec<Sym> = Vec::new();
        let mut ok = true;
        for (v, c) in atom.args.iter().zip(candidate.args.iter()) {
            match binding.get(v) {
                Some(bound) if bound == c => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    binding.insert(v.clone(), c.clone());
                    added.push(v.clone());
                }
            }
        }
        if ok {
            extend_binding(body, idx + 1, pivot, by_rel, delta_by_rel, binding, out);
        }
        for v in added {
            binding.remove(&v);
        }
    }
}

/// Three-valued evaluation verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmqVerdict {
    True,
    False,
    /// The chase was truncated and the query did not map: sound negative
    /// evidence is unavailable.
    Unknown,
}

impl OmqVerdict {
    pub fn decisive(&self) -> Option<bool> {
        match self {
            OmqVerdict::True => Some(true),
            OmqVerdict::False => Some(false),
            OmqVerdict::Unknown => None,
        }
    }
}

impl fmt::Display for OmqVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmqVerdict::True => write!(f, "true"),
            OmqVerdict::False => write!(f, "false"),
            OmqVerdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Evaluate an OMQ over a database: chase, then map the query.
pub fn eval_omq(
    q: &Omq,
    d: &Structure,
    depth_budget: Option<usize>,
) -> Result<OmqVerdict, ChaseError> {
    Ok(eval_omq_witness(q, d, depth_budget)?.0)
}

/// Evaluation that also returns, on a positive answer, the index of the
/// satisfied disjunct and a witnessing homomorphism into the chase.
pub fn eval_omq_witness(
    q: &Omq,
    d: &Structure,
    depth_budget: Option<usize>,
) -> Result<(OmqVerdict, Option<(usize, Homomorphism)>), ChaseError> {
    q.check_database(d)?;
    // Guarded Datalog is always evaluated exactly, budget or not.
    let budget = if q.ontology.is_gdlog() { None } else { depth_budget };
    let chase = run_chase(&q.ontology, d, budget)?;
    for (i, disjunct) in q.query.disjuncts().iter().enumerate() {
        if let Some(h) = evaluate_cq_witness(disjunct, &chase.structure) {
            return Ok((OmqVerdict::True, Some((i, h))));
        }
    }
    if chase.complete {
        Ok((OmqVerdict::False, None))
    } else {
        Ok((OmqVerdict::Unknown, None))
    }
}

/// All chase facts whose arguments lie inside `targets`. Guarded Datalog
/// only: its chase is finite without a budget.
pub fn atomic_consequences(
    ontology: &Ontology,
    d: &Structure,
    targets: &BTreeSet<Constant>,
) -> Result<BTreeSet<Fact>, ChaseError> {
    if !ontology.is_gdlog() {
        return Err(ChaseError::NotDatalog);
    }
    let chase = run_chase(ontology, d, None)?;
    Ok(chase
        .structure
        .facts()
        .iter()
        .filter(|f| f.args.iter().all(|a| targets.contains(a)))
        .cloned()
        .collect())
}

/// Contraction-level injective-only mappability, used by the
/// query-initiality machinery: `p` maps into `i` and every homomorphism is
/// injective.
pub fn io_maps(p: &Cq, i: &Structure) -> bool {
    crate::relstruct::is_injective_only(&p.canonical_db(), i)
}
