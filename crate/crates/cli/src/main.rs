//! Command surface of the guarded OMQ workbench.
//!
//! Exit codes: 0 on success, 1 on a negative verdict (query not entailed,
//! no homomorphism, check failed, counterexample found, disagreement), 2 on
//! errors. Machine-readable reports go to standard output.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use omq_cli::format::{self, Mode};
use omq_cli::workspace::Workspace;
use omq_core::chase::{eval_omq_witness, run_chase, OmqVerdict};
use omq_core::cover::{
    all_databases, check_equiv_bounded_domain, check_equiv_on_corpus, cover_cqs_from,
    validate_extended_adornment, EquivOutcome,
};
use omq_core::query::Cq;
use omq_core::reduction::{
    generate_random_csp, reduce_csp_to_omq, verify_reduction_instance, CspParams,
    ReductionInstance,
};
use omq_core::relstruct::{
    core_of, find_homomorphisms, guarded_analysis, product, HomMode, Structure,
};
use omq_core::unravel::{
    ext_once, guarded_unraveling, is_diversification, is_qi_bounded,
    minimal_diversifications_bounded,
};
use omq_core::width::{
    f_width, hypergraph_of_cq, hypergraph_of_structure, smw_bracket, treewidth_exact, Hypergraph,
    SubmodularFn,
};
use omq_core::{textio, Ucq};

#[derive(Parser)]
#[command(name = "omq", about = "Workbench for guarded ontology-mediated querying", version)]
struct Cli {
    /// Workspace files holding named structures, ontologies, queries,
    /// OMQs, chardbs, and tree decompositions.
    #[arg(short = 'w', long = "workspace", global = true)]
    workspace: Vec<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Machine)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WidthKind {
    Tw,
    Fwidth,
    Bracket,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CostKind {
    Half,
    Cardinality,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an OMQ over a database.
    Eval {
        #[arg(long)]
        omq: String,
        #[arg(long)]
        db: String,
        /// Chase depth budget (required outside guarded Datalog).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Run the chase and print facts with derivation levels.
    Chase {
        #[arg(long)]
        omq: Option<String>,
        #[arg(long)]
        ontology: Option<String>,
        #[arg(long)]
        db: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Enumerate homomorphisms between two structures.
    Hom {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        injective: bool,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Compute the core and a retraction.
    Core {
        #[arg(long)]
        db: String,
    },
    /// Product of two structures over the same schema.
    Product {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// List contractions of every disjunct of a query.
    Contract {
        #[arg(long)]
        query: String,
    },
    /// Guarded sets and kernel of a database.
    Guarded {
        #[arg(long)]
        db: String,
    },
    /// Width measures of a database, query, or OMQ.
    Width {
        #[arg(value_enum)]
        kind: WidthKind,
        #[arg(long)]
        db: Option<String>,
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        omq: Option<String>,
        /// Cost function for fwidth/bracket.
        #[arg(long, value_enum, default_value_t = CostKind::Half)]
        cost: CostKind,
    },
    /// Guarded unraveling of a database at a guarded set.
    Unravel {
        #[arg(long)]
        db: String,
        /// Comma-separated constants forming the root guarded set.
        #[arg(long)]
        at: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        omq: Option<String>,
    },
    /// Extend a chardb's database with unravelings of its base.
    Ext {
        #[arg(long)]
        chardb: String,
        #[arg(long)]
        omq: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Check that a chardb is a diversification.
    Divcheck {
        #[arg(long)]
        chardb: String,
    },
    /// Bounded query-initiality check.
    Qicheck {
        #[arg(long)]
        db: String,
        #[arg(long)]
        omq: String,
        #[arg(long)]
        bound: usize,
    },
    /// Bounded minimal-diversification search.
    Mdiv {
        #[arg(long)]
        db: String,
        #[arg(long)]
        omq: String,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Cover CQs from a chardb specification.
    Cover {
        #[arg(long)]
        omq: String,
        #[arg(long)]
        chardb: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long)]
        hom_cap: Option<usize>,
        #[arg(long)]
        size_budget: Option<usize>,
    },
    /// Validate an extended adornment.
    AdornCheck {
        #[arg(long)]
        query: String,
        /// Which disjunct of the query is being adorned.
        #[arg(long, default_value_t = 0)]
        disjunct: usize,
        #[arg(long)]
        td: String,
        /// Chardb supplying the guard database, map, and base.
        #[arg(long)]
        chardb: String,
        #[arg(long)]
        omq: String,
    },
    /// Refute equivalence of two OMQs over a corpus.
    EquivCorpus {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Named structures to use as the corpus.
        #[arg(long)]
        corpus: Vec<String>,
        /// Enumerate every database with this many constants, literally.
        #[arg(long)]
        all_dbs: Option<usize>,
        /// Check exhaustively over all databases with this many constants
        /// via minimal models.
        #[arg(long)]
        bounded_domain: Option<usize>,
    },
    /// Build the reduction image of a CSP instance.
    Reduce {
        #[arg(long)]
        chardb: String,
        #[arg(long)]
        omq: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Run the reduction and compare both sides.
    VerifyReduction {
        #[arg(long)]
        chardb: String,
        #[arg(long)]
        omq: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Where to write the reproducer bundle on disagreement.
        #[arg(long)]
        bundle_dir: Option<PathBuf>,
    },
    /// Generate a seeded random CSP instance from a chardb pool.
    GenCsp {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        constants: usize,
        #[arg(long)]
        facts: usize,
        #[arg(long)]
        omq: String,
        #[arg(long)]
        chardb: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match cli.format {
        Format::Human => Mode::Human,
        Format::Machine => Mode::Machine,
    };
    match run(&cli, mode) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

fn ok() -> ExitCode {
    ExitCode::from(0)
}

fn negative() -> ExitCode {
    ExitCode::from(1)
}

fn run(cli: &Cli, mode: Mode) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let ws = Workspace::load(&cli.workspace)?;
    match &cli.command {
        Command::Eval { omq, db, depth } => {
            let q = ws.omq(omq)?;
            let d = ws.structure(db)?;
            let (v, witness) = eval_omq_witness(q, d, *depth)?;
            print!("{}", format::eval_report(mode, v, witness.as_ref(), *depth));
            Ok(if v == OmqVerdict::False { negative() } else { ok() })
        }
        Command::Chase {
            omq,
            ontology,
            db,
            depth,
        } => {
            let onto = match (omq, ontology) {
                (Some(q), _) => ws.omq(q)?.ontology.clone(),
                (None, Some(o)) => ws.ontology(o)?.clone(),
                (None, None) => return Err("chase needs --omq or --ontology".into()),
            };
            let d = ws.structure(db)?;
            let r = run_chase(&onto, d, *depth)?;
            print!("{}", format::chase_report(mode, &r));
            Ok(ok())
        }
        Command::Hom {
            from,
            to,
            injective,
            limit,
        } => {
            let a = ws.structure(from)?;
            let b = ws.structure(to)?;
            let hmode = if *injective {
                HomMode::Injective
            } else {
                HomMode::Any
            };
            let homs = find_homomorphisms(a, b, hmode, *limit)?;
            print!("{}", format::homs_report(mode, &homs, *limit));
            Ok(if homs.is_empty() { negative() } else { ok() })
        }
        Command::Core { db } => {
            let d = ws.structure(db)?;
            let (core, retraction) = core_of(d);
            print!("{}", format::core_report(mode, &core, &retraction));
            Ok(ok())
        }
        Command::Product { left, right } => {
            let a = ws.structure(left)?;
            let b = ws.structure(right)?;
            let (p, pa, pb) = product(a, b)?;
            let mut out = format!("facts={}\n", p.len());
            format::structure_lines("fact", &p, &mut out);
            out.push_str(&format!("proj_left={}\n", format::hom_line(&pa)));
            out.push_str(&format!("proj_right={}\n", format::hom_line(&pb)));
            print!("{}", out);
            Ok(ok())
        }
        Command::Contract { query } => {
            let q = ws.query(query)?;
            let mut out = String::new();
            for (di, d) in q.disjuncts().iter().enumerate() {
                for c in omq_core::query::contractions(d) {
                    out.push_str(&format!("contraction={} :- {}\n", di, c));
                }
            }
            print!("{}", out);
            Ok(ok())
        }
        Command::Guarded { db } => {
            let d = ws.structure(db)?;
            print!("{}", format::guarded_report(mode, &guarded_analysis(d)));
            Ok(ok())
        }
        Command::Width {
            kind,
            db,
            query,
            omq,
            cost,
        } => run_width(&ws, mode, *kind, db, query, omq, *cost),
        Command::Unravel { db, at, depth, omq } => {
            let d = ws.structure(db)?;
            let root: BTreeSet<_> = ws.constants_of(d, at)?.into_iter().collect();
            let q = omq.as_deref().map(|n| ws.omq(n)).transpose()?;
            let u = guarded_unraveling(d, &root, *depth, q)?;
            print!("{}", format::unravel_report(mode, &u));
            Ok(ok())
        }
        Command::Ext { chardb, omq, depth } => {
            let spec = ws.chardb(chardb)?;
            let q = ws.omq(omq)?;
            let e = ext_once(&spec.db, &spec.up, &spec.base, q, *depth)?;
            let mut out = format!(
                "facts={} parts={} stabilized={}\n",
                e.result.len(),
                e.parts.len(),
                e.all_stabilized
            );
            format::structure_lines("fact", &e.result, &mut out);
            print!("{}", out);
            Ok(ok())
        }
        Command::Divcheck { chardb } => {
            let spec = ws.chardb(chardb)?;
            let good = is_diversification(&spec.db, &spec.up, &spec.base);
            println!("diversification={}", good);
            Ok(if good { ok() } else { negative() })
        }
        Command::Qicheck { db, omq, bound } => {
            let d = ws.structure(db)?;
            let q = ws.omq(omq)?;
            let v = is_qi_bounded(d, q, *bound)?;
            print!("{}", format::qi_report(mode, &v, *bound));
            Ok(if v.is_not_qi() { negative() } else { ok() })
        }
        Command::Mdiv {
            db,
            omq,
            budget,
            depth,
        } => {
            let d0 = ws.structure(db)?;
            let q = ws.omq(omq)?;
            let r = minimal_diversifications_bounded(d0, q, *budget, *depth)?;
            print!("{}", format::mdiv_report(mode, &r));
            Ok(ok())
        }
        Command::Cover {
            omq,
            chardb,
            depth,
            hom_cap,
            size_budget,
        } => {
            let q = ws.omq(omq)?;
            let spec = ws.chardb(chardb)?;
            let out = cover_cqs_from(q, spec, *depth, *hom_cap, *size_budget)?;
            print!("{}", format::cover_report(mode, &out));
            Ok(ok())
        }
        Command::AdornCheck {
            query,
            disjunct,
            td,
            chardb,
            omq,
        } => {
            let q = ws.omq(omq)?;
            let ucq: &Ucq = ws.query(query)?;
            let p: &Cq = ucq
                .disjuncts()
                .get(*disjunct)
                .ok_or("disjunct index out of range")?;
            let decomposition = ws.treedec(td)?;
            let spec = ws.chardb(chardb)?;
            let report =
                validate_extended_adornment(p, decomposition, &spec.db, &spec.up, &spec.base, q)?;
            print!("{}", format::adorn_report(mode, &report));
            Ok(if report.valid { ok() } else { negative() })
        }
        Command::EquivCorpus {
            left,
            right,
            corpus,
            all_dbs,
            bounded_domain,
        } => {
            let q1 = ws.omq(left)?;
            let q2 = ws.omq(right)?;
            let outcome = if let Some(n) = bounded_domain {
                let (outcome, complete) = check_equiv_bounded_domain(q1, q2, *n)?;
                if !complete && outcome.is_equivalent_on_corpus() {
                    println!("note=enumeration-truncated");
                }
                outcome
            } else if let Some(n) = all_dbs {
                let dbs = all_databases(&q1.data_schema, *n, 1 << 22)?;
                check_equiv_on_corpus(q1, q2, &dbs)?
            } else {
                let dbs: Vec<Structure> = corpus
                    .iter()
                    .map(|name| ws.structure(name).cloned())
                    .collect::<Result<_, _>>()?;
                check_equiv_on_corpus(q1, q2, &dbs)?
            };
            print!("{}", format::equiv_report(mode, &outcome));
            Ok(match outcome {
                EquivOutcome::NoCounterexample { .. } => ok(),
                EquivOutcome::Counterexample { .. } => negative(),
            })
        }
        Command::Reduce {
            chardb,
            omq,
            right,
            depth,
        } => {
            let inst = ReductionInstance {
                spec: ws.chardb(chardb)?.clone(),
                q: ws.omq(omq)?.clone(),
                right: ws.structure(right)?.clone(),
                depth: *depth,
            };
            let report = reduce_csp_to_omq(&inst)?;
            print!("{}", format::reduction_report(mode, &report, *depth));
            Ok(ok())
        }
        Command::VerifyReduction {
            chardb,
            omq,
            right,
            depth,
            bundle_dir,
        } => {
            let inst = ReductionInstance {
                spec: ws.chardb(chardb)?.clone(),
                q: ws.omq(omq)?.clone(),
                right: ws.structure(right)?.clone(),
                depth: *depth,
            };
            let (report, bundle) = verify_reduction_instance(&inst)?;
            print!("{}", format::reduction_report(mode, &report, *depth));
            if let (Some(bundle), Some(dir)) = (&bundle, bundle_dir) {
                bundle.write_to(dir)?;
                println!("bundle={}", dir.display());
            }
            Ok(if report.agree == Some(true) { ok() } else { negative() })
        }
        Command::GenCsp {
            seed,
            constants,
            facts,
            omq,
            chardb,
        } => {
            let q = ws.omq(omq)?;
            let pool: Vec<_> = chardb
                .iter()
                .map(|name| ws.chardb(name).cloned())
                .collect::<Result<_, _>>()?;
            let params = CspParams {
                constants: *constants,
                facts: *facts,
                schema: q.data_schema.clone(),
            };
            let (spec, b) = generate_random_csp(*seed, &params, &pool)?;
            println!("seed={} constants={} facts={}", seed, constants, facts);
            print!("{}", textio::serialize_structure("right", &b));
            print!("{}", textio::serialize_structure("left", &spec.db));
            Ok(ok())
        }
    }
}

fn run_width(
    ws: &Workspace,
    mode: Mode,
    kind: WidthKind,
    db: &Option<String>,
    query: &Option<String>,
    omq: &Option<String>,
    cost: CostKind,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let hypergraphs: Vec<(String, Hypergraph)> = match (db, query, omq) {
        (Some(name), None, None) => vec![(
            name.clone(),
            hypergraph_of_structure(ws.structure(name)?),
        )],
        (None, Some(name), None) => ws
            .query(name)?
            .disjuncts()
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("{}[{}]", name, i), hypergraph_of_cq(d)))
            .collect(),
        (None, None, Some(name)) => ws
            .omq(name)?
            .query
            .disjuncts()
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("{}[{}]", name, i), hypergraph_of_cq(d)))
            .collect(),
        _ => return Err("width needs exactly one of --db, --query, --omq".into()),
    };
    let cost_fn = |h: &Hypergraph| match cost {
        CostKind::Half => SubmodularFn::half_cardinality(h.vertices().clone()),
        CostKind::Cardinality => SubmodularFn::cardinality(h.vertices().clone()),
    };
    let mut out = String::new();
    let mut max_width: Option<omq_core::ratio::Ratio> = None;
    for (label, h) in &hypergraphs {
        match kind {
            WidthKind::Tw => {
                let (w, td) = treewidth_exact(h)?;
                out.push_str(&format!("target={} treewidth={}\n", label, w));
                max_width = max_width.max(Some(omq_core::ratio::Ratio::int(w as i64)));
                if mode == Mode::Machine {
                    format::treedec_lines(&td, &mut out);
                }
            }
            WidthKind::Fwidth => {
                let f = cost_fn(h);
                let (w, td) = f_width(h, &f)?;
                out.push_str(&format!(
                    "target={} fwidth={} cost=f:{}\n",
                    label, w, f.label
                ));
                max_width = max_width.max(Some(w));
                if mode == Mode::Machine {
                    format::treedec_lines(&td, &mut out);
                }
            }
            WidthKind::Bracket => {
                let f = cost_fn(h);
                let b = smw_bracket(h, &[f])?;
                out.push_str(&format!("target={} ", label));
                out.push_str(&format::bracket_report(mode, &b));
            }
        }
    }
    // The measure of a union lifts as the maximum over its disjuncts.
    if hypergraphs.len() > 1 && kind != WidthKind::Bracket {
        if let Some(m) = max_width {
            out.push_str(&format!("max={}\n", m));
        }
    }
    print!("{}", out);
    Ok(ExitCode::from(0))
}
