//! The reduction from uniform CSP instances to OMQ evaluation instances,
//! with an agreement harness.
//!
//! Given a characteristic-database specification `(d, up, d0)` for an OMQ
//! and a right-hand structure `b`, the reduction forms the product
//! `d x b`, drops the facts on which the left projection collapses
//! constants, and glues unravelings of `d0` onto the survivor. The CSP
//! question `d -> b` and the OMQ question over the glued database are then
//! answered independently: the CSP side by an exhaustive function
//! enumeration deliberately separate from the backtracking solver, the OMQ
//! side by chase evaluation. When the specification's side conditions hold,
//! the two answers agree on every instance; disagreement produces a
//! reproducer bundle and signals either a bug or an unverified
//! semi-decidable side condition on the spec.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::chase::{eval_omq_witness, ChaseError, Omq, OmqVerdict};
use crate::cover::{CharDbSpec, CoverError};
use crate::relstruct::{
    core_of, product, Constant, Fact, Homomorphism, RelError, Schema, Structure, Sym,
};
use crate::rng::SplitMix64;
use crate::textio;
use crate::unravel::{ext, UnravelCache, UnravelError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionError {
    NotGdlog,
    NotACore,
    SpecInvalid { reason: String },
    ProjectionNotIgs,
    EmptyPool,
    BadParams { reason: String },
    Rel(RelError),
    Chase(ChaseError),
    Unravel(String),
}

impl fmt::Display for ReductionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionError::NotGdlog => write!(f, "the reduction requires a guarded Datalog OMQ"),
            ReductionError::NotACore => {
                write!(f, "the left-hand database must be a core")
            }
            ReductionError::SpecInvalid { reason } => write!(f, "spec invalid: {}", reason),
            ReductionError::ProjectionNotIgs => {
                write!(f, "left projection failed the guarded-injectivity re-check")
            }
            ReductionError::EmptyPool => write!(f, "the spec pool is empty"),
            ReductionError::BadParams { reason } => write!(f, "bad parameters: {}", reason),
            ReductionError::Rel(e) => write!(f, "{}", e),
            ReductionError::Chase(e) => write!(f, "{}", e),
            ReductionError::Unravel(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for ReductionError {}

impl From<RelError> for ReductionError {
    fn from(e: RelError) -> ReductionError {
        ReductionError::Rel(e)
    }
}

impl From<ChaseError> for ReductionError {
    fn from(e: ChaseError) -> ReductionError {
        ReductionError::Chase(e)
    }
}

impl From<UnravelError> for ReductionError {
    fn from(e: UnravelError) -> ReductionError {
        ReductionError::Unravel(e.to_string())
    }
}

impl From<CoverError> for ReductionError {
    fn from(e: CoverError) -> ReductionError {
        ReductionError::SpecInvalid {
            reason: e.to_string(),
        }
    }
}

/// One CSP-to-OMQ instance: the spec supplies the left structure and its
/// diversification context; `right` is the CSP's right-hand structure.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub spec: CharDbSpec,
    pub q: Omq,
    pub right: Structure,
    pub depth: usize,
}

/// Fact-count accounting for the parameter-control check: the stripped
/// product is at most `|d| * |b|` facts, and the glued copies depend only
/// on the far database and the depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeAccounting {
    pub left_facts: usize,
    pub right_facts: usize,
    pub product_facts: usize,
    pub stripped_facts: usize,
    pub extension_facts: usize,
    pub within_budget: bool,
    /// Whether every glued unraveling stabilized within the depth cap.
    pub stabilized: bool,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    /// The stripped product.
    pub stripped: Structure,
    /// The stripped product glued with unravelings.
    pub extended: Structure,
    pub csp: Option<bool>,
    pub omq: OmqVerdict,
    pub agree: Option<bool>,
    /// Witness for a positive OMQ answer: disjunct index and homomorphism
    /// into the chase of the extension.
    pub witness: Option<(usize, Homomorphism)>,
    /// The composed guarded-injective map from the stripped product into
    /// the far database.
    pub composed_up: Homomorphism,
    pub sizes: SizeAccounting,
}

/// Drop the product facts on which the projection collapses constants;
/// facts whose argument constants have pairwise distinct images survive.
pub fn strip_noninjective(prod: &Structure, proj: &Homomorphism) -> Structure {
    let facts: BTreeSet<Fact> = prod
        .facts()
        .iter()
        .filter(|f| {
            let args = f.arg_set();
            let images: BTreeSet<&Constant> =
                args.iter().filter_map(|a| proj.apply(a)).collect();
            images.len() == args.len()
        })
        .cloned()
        .collect();
    Structure::new(prod.schema().clone(), facts).expect("subset of a valid structure")
}

/// Build the reduction image of an instance; the CSP side is left
/// unanswered.
pub fn reduce_csp_to_omq(inst: &ReductionInstance) -> Result<ReductionReport, ReductionError> {
    reduce_with_cache(inst, &mut UnravelCache::new())
}

pub fn reduce_with_cache(
    inst: &ReductionInstance,
    cache: &mut UnravelCache,
) -> Result<ReductionReport, ReductionError> {
    if !inst.q.ontology.is_gdlog() {
        return Err(ReductionError::NotGdlog);
    }
    inst.spec.verify()?;
    inst.q.check_database(&inst.spec.db)?;
    inst.q.check_database(&inst.right)?;
    // Align both sides on the data schema before taking the product.
    let d = Structure::new(
        inst.q.data_schema.clone(),
        inst.spec.db.facts().iter().cloned(),
    )?;
    let right = Structure::new(
        inst.q.data_schema.clone(),
        inst.right.facts().iter().cloned(),
    )?;
    let (core, _) = core_of(&d);
    if core.domain().len() != d.domain().len() {
        return Err(ReductionError::NotACore);
    }
    let (prod, proj_left, _proj_right) = product(&d, &right)?;
    let stripped = strip_noninjective(&prod, &proj_left);
    let proj_restricted = proj_left.restrict(&stripped.domain());
    if !proj_restricted.is_igs(&stripped) {
        return Err(ReductionError::ProjectionNotIgs);
    }
    let composed = proj_restricted.then(&inst.spec.up);
    let extension = ext(&stripped, &composed, &inst.spec.base, &inst.q, inst.depth, cache)?;
    let (omq, witness) = eval_omq_witness(&inst.q, &extension.result, None)?;
    let sizes = SizeAccounting {
        left_facts: d.len(),
        right_facts: inst.right.len(),
        product_facts: prod.len(),
        stripped_facts: stripped.len(),
        extension_facts: extension.result.len(),
        within_budget: stripped.len() <= d.len() * inst.right.len(),
        stabilized: extension.all_stabilized,
    };
    Ok(ReductionReport {
        stripped,
        extended: extension.result,
        csp: None,
        omq,
        agree: None,
        witness,
        composed_up: composed,
        sizes,
    })
}

/// Exhaustive homomorphism existence by enumerating every function from
/// `dom(a)` to `dom(b)`. Deliberately independent of the backtracking
/// solver; the harness uses it as the CSP-side oracle.
pub fn exhaustive_hom_exists(a: &Structure, b: &Structure) -> bool {
    let dom_a: Vec<Constant> = a.domain().into_iter().collect();
    let dom_b: Vec<Constant> = b.domain().into_iter().collect();
    if dom_a.is_empty() {
        return true;
    }
    if dom_b.is_empty() {
        return false;
    }
    let mut choice = vec![0usize; dom_a.len()];
    loop {
        let map: std::collections::BTreeMap<Constant, Constant> = dom_a
            .iter()
            .cloned()
            .zip(choice.iter().map(|&i| dom_b[i].clone()))
            .collect();
        let h = Homomorphism::new(map);
        if a.facts()
            .iter()
            .all(|f| h.apply_fact(f).is_some_and(|img| b.contains(&img)))
        {
            return true;
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return false;
            }
            choice[i] += 1;
            if choice[i] < dom_b.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Run the full harness on one instance: answer both sides independently
/// and compare. On disagreement the report carries a reproducer bundle.
pub fn verify_reduction_instance(
    inst: &ReductionInstance,
) -> Result<(ReductionReport, Option<ReproducerBundle>), ReductionError> {
    verify_with_cache(inst, &mut UnravelCache::new(), None)
}

pub fn verify_with_cache(
    inst: &ReductionInstance,
    cache: &mut UnravelCache,
    seed: Option<u64>,
) -> Result<(ReductionReport, Option<ReproducerBundle>), ReductionError> {
    let mut report = reduce_with_cache(inst, cache)?;
    let csp = exhaustive_hom_exists(&inst.spec.db, &inst.right);
    report.csp = Some(csp);
    report.agree = Some(report.omq.decisive() == Some(csp));
    let bundle = if report.agree == Some(false) {
        Some(ReproducerBundle::for_instance(inst, &report, seed))
    } else {
        None
    };
    Ok((report, bundle))
}

/// Parameters for the random right-hand-structure generator.
#[derive(Clone, Debug)]
pub struct CspParams {
    pub constants: usize,
    pub facts: usize,
    pub schema: Schema,
}

/// Deterministic per seed: draw a left structure from the spec pool and a
/// random right-hand structure over the schema.
pub fn generate_random_csp(
    seed: u64,
    params: &CspParams,
    pool: &[CharDbSpec],
) -> Result<(CharDbSpec, Structure), ReductionError> {
    if pool.is_empty() {
        return Err(ReductionError::EmptyPool);
    }
    if params.constants == 0 {
        return Err(ReductionError::BadParams {
            reason: "need at least one constant".into(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let spec = pool[rng.usize_below(pool.len())].clone();
    let consts: Vec<Constant> = (0..params.constants)
        .map(|i| Constant::input(format!("b{}", i)))
        .collect();
    let symbols: Vec<(Sym, usize)> = params
        .schema
        .symbols()
        .map(|(s, a)| (s.clone(), a))
        .collect();
    let mut facts: BTreeSet<Fact> = BTreeSet::new();
    for _ in 0..params.facts {
        let (rel, arity) = &symbols[rng.usize_below(symbols.len())];
        let args: Vec<Constant> = (0..*arity)
            .map(|_| consts[rng.usize_below(consts.len())].clone())
            .collect();
        facts.insert(Fact::new(rel.clone(), args));
    }
    let b = Structure::new(params.schema.clone(), facts)?;
    Ok((spec, b))
}

/// Everything needed to replay a disagreement: instance files in the text
/// formats plus a manifest of seeds and budgets.
#[derive(Clone, Debug)]
pub struct ReproducerBundle {
    pub files: Vec<(String, String)>,
}

impl ReproducerBundle {
    fn for_instance(
        inst: &ReductionInstance,
        report: &ReductionReport,
        seed: Option<u64>,
    ) -> ReproducerBundle {
        let mut files = vec![(
            "left.db".to_string(),
            textio::serialize_structure("left", &inst.spec.db),
        )];
        files.push((
            "base.db".to_string(),
            textio::serialize_structure("base", &inst.spec.base),
        ));
        files.push((
            "right.db".to_string(),
            textio::serialize_structure("right", &inst.right),
        ));
        files.push((
            "stripped.db".to_string(),
            textio::serialize_structure("stripped", &report.stripped),
        ));
        files.push((
            "extended.db".to_string(),
            textio::serialize_structure("extended", &report.extended),
        ));
        files.push((
            "ontology.rules".to_string(),
            textio::serialize_ontology("ontology", &inst.q.ontology),
        ));
        files.push((
            "query.cq".to_string(),
            textio::serialize_query("q", &inst.q.query),
        ));
        let map: Vec<(String, String)> = inst
            .spec
            .up
            .map()
            .iter()
            .map(|(k, v)| (k.name.as_str().to_string(), v.name.as_str().to_string()))
            .collect();
        files.push((
            "spec.chardb".to_string(),
            textio::serialize_chardb_block("spec", "left", "base", &map),
        ));
        let mut manifest = String::new();
        manifest.push_str(&format!("depth={}\n", inst.depth));
        manifest.push_str(&format!(
            "seed={}\n",
            seed.map_or("none".to_string(), |s| s.to_string())
        ));
        manifest.push_str(&format!("csp={:?}\n", report.csp));
        manifest.push_str(&format!("omq={}\n", report.omq));
        files.push(("manifest.txt".to_string(), manifest));
        ReproducerBundle { files }
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }
}
