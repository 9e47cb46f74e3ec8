//! A workbench for guarded ontology-mediated querying.
//!
//! The crate evaluates Boolean unions of conjunctive queries against
//! databases enriched with guarded tuple-generating dependencies, and
//! implements the normalization machinery built on top of that:
//!
//! - [`relstruct`]: relational schemas and structures, homomorphism search,
//!   cores, products, guarded sets and kernels;
//! - [`query`]: Boolean conjunctive queries and unions, canonical databases,
//!   contractions and sub-queries;
//! - [`chase`]: rule classification (guarded / guarded Datalog), the
//!   oblivious chase, and OMQ evaluation;
//! - [`width`]: hypergraphs, tree decompositions, exact bag-size treewidth,
//!   `f`-width under submodular cost functions, and submodular-width
//!   brackets;
//! - [`unravel`]: guarded unravelings, the gluing of unravelings onto a
//!   database, diversifications and their preorder, bounded query-initiality
//!   checks, and minimal-diversification search;
//! - [`cover`]: cover CQ construction from characteristic-database
//!   specifications, guard-set minimization, adornment validation, and
//!   corpus-based equivalence refutation;
//! - [`reduction`]: the reduction from uniform CSP instances to OMQ
//!   evaluation instances, with an agreement harness;
//! - [`textio`]: the line-oriented text formats shared with the CLI.
//!
//! Everything is exact and brute-force-verifiable at desk scale: search is
//! complete within stated bounds, outputs are deterministic, and every
//! construction can be re-checked by an independent enumeration.

pub mod chase;
pub mod cover;
pub mod fixtures;
pub mod query;
pub mod ratio;
pub mod reduction;
pub mod relstruct;
pub mod rng;
pub mod textio;
pub mod unravel;
pub mod width;

pub use chase::{eval_omq, run_chase, ChaseResult, Omq, OmqVerdict, Ontology, OntologyClass, Tgd};
pub use query::{Atom, Cq, Ucq};
pub use ratio::Ratio;
pub use relstruct::{
    core_of, find_homomorphisms, guarded_analysis, is_injective_only, isomorphic, product,
    Constant, Fact, HomMode, Homomorphism, Origin, Schema, Structure, Sym,
};
pub use width::{Hypergraph, SubmodularFn, TreeDecomposition, WidthBracket};
