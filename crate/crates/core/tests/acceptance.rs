//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its runtime. Run with `--nocapture` to see the lines for
//! passing criteria too.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use omq_core::chase::{eval_omq, run_chase, OmqVerdict};
use omq_core::cover::{
    all_databases, check_equiv_bounded_domain, check_equiv_on_corpus, cover_cqs_from, cover_omq,
    CharDbSpec, EquivOutcome,
};
use omq_core::fixtures;
use omq_core::ratio::Ratio;
use omq_core::reduction::{
    generate_random_csp, verify_with_cache, CspParams, ReductionInstance,
};
use omq_core::relstruct::{
    core_of, find_homomorphisms, hom_equivalent, hom_exists, is_injective_only, isomorphic,
    Constant, Fact, HomMode, Homomorphism, Schema, Structure, Sym,
};
use omq_core::rng::SplitMix64;
use omq_core::unravel::{
    diversify_from_hom, ext_once, is_qi_bounded, QiVerdict, UnravelCache,
};
use omq_core::width::{
    f_width, hypergraph_of_cq, hypergraph_of_structure, smw_bracket, treewidth_exact,
    SubmodularFn,
};

struct Criterion {
    name: &'static str,
    budget: Duration,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn start(name: &'static str, budget_secs: u64) -> Criterion {
        Criterion {
            name,
            budget: Duration::from_secs(budget_secs),
            started: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed();
        if elapsed > self.budget {
            self.failures.push(format!(
                "runtime {:.2?} exceeded budget {:.2?}",
                elapsed, self.budget
            ));
        }
        if self.failures.is_empty() {
            println!("{}: PASS ({:.2?})", self.name, elapsed);
        } else {
            println!("{}: FAIL ({:.2?})", self.name, elapsed);
            for f in &self.failures {
                println!("  - {}", f);
            }
            panic!("{} failed:\n{}", self.name, self.failures.join("\n"));
        }
    }
}

#[test]
fn criterion_1_triangle_suite() {
    let mut c = Criterion::start("criterion 1 (triangle chase/io suite)", 1);
    let ex = fixtures::triangle_example();

    let chase1 = run_chase(&ex.omq.ontology, &ex.d1, None).unwrap();
    let mut expect1 = ex.d1.facts().clone();
    expect1.insert(fixtures::fact("S", &["b", "a"]));
    expect1.insert(fixtures::fact("T", &["a", "a"]));
    c.check(
        chase1.structure.facts() == &expect1 && chase1.complete,
        format!("chase of d1 differs: {:?}", chase1.structure),
    );

    let chase2 = run_chase(&ex.omq.ontology, &ex.d2, None).unwrap();
    let mut expect2 = ex.d2.facts().clone();
    expect2.insert(fixtures::fact("S", &["b", "c"]));
    expect2.insert(fixtures::fact("T", &["c", "a"]));
    c.check(
        chase2.structure.facts() == &expect2 && chase2.complete,
        format!("chase of d2 differs: {:?}", chase2.structure),
    );

    let qc = ex.q_xz_contraction.canonical_db();
    c.check(
        is_injective_only(&qc, &chase1.structure),
        "contracted query should map injectively-only into chase(d1)".to_string(),
    );
    c.check(
        !hom_exists(&qc, &chase2.structure),
        "contracted query should not map into chase(d2)".to_string(),
    );

    let homs = find_homomorphisms(&ex.d2, &ex.d1, HomMode::Any, None).unwrap();
    c.check(!homs.is_empty(), "expected a homomorphism d2 -> d1".to_string());
    let witness = fixtures::hom(&[("c", "a"), ("a", "a"), ("b", "b"), ("d", "d")]);
    c.check(
        homs.contains(&witness),
        format!("expected witness {:?} among {:?}", witness, homs),
    );
    c.finish();
}

#[test]
fn criterion_2_width_suite() {
    let mut c = Criterion::start("criterion 2 (clique width suite)", 10);
    for i in 2..=6usize {
        let h = omq_core::width::Hypergraph::clique(i);
        let half = SubmodularFn::half_cardinality(h.vertices().clone());
        let (w, td) = f_width(&h, &half).unwrap();
        c.check(
            w == Ratio::half(i as i64),
            format!("f-width of the {}-clique: got {}, want {}", i, w, Ratio::half(i as i64)),
        );
        c.check(
            td.is_valid_for(&h),
            format!("f-width witness for the {}-clique does not validate", i),
        );

        let (tw, tw_td) = treewidth_exact(&h).unwrap();
        c.check(
            tw == i,
            format!("bag-size treewidth of the {}-clique: got {}, want {}", i, tw, i),
        );
        c.check(
            tw_td.is_valid_for(&h),
            format!("treewidth witness for the {}-clique does not validate", i),
        );

        let ex = fixtures::clique_example(i);
        let hq = hypergraph_of_cq(&ex.guarded_cq);
        let half_q = SubmodularFn::half_cardinality(hq.vertices().clone());
        let bracket = smw_bracket(&hq, &[half_q]).unwrap();
        c.check(
            bracket.upper <= Ratio::int(1),
            format!("guarded clique variant {}: upper bound {} > 1", i, bracket.upper),
        );
        c.check(
            bracket.upper_witness.is_valid_for(&hq),
            format!("bracket witness for guarded variant {} does not validate", i),
        );
    }
    c.finish();
}

#[test]
fn criterion_3_cover_suite() {
    let mut c = Criterion::start("criterion 3 (cover construction and equivalence)", 60);
    for i in [2usize, 3, 4] {
        let ex = fixtures::clique_example(i);
        let spec = CharDbSpec::identity(ex.guard_db.clone(), ex.base_db.clone());
        let out = cover_cqs_from(&ex.omq, &spec, 4, None, None).unwrap();
        c.check(
            out.cover_cqs.len() == 1,
            format!("arity {}: expected exactly one cover CQ, got {}", i, out.cover_cqs.len()),
        );
        if let Some(cover) = out.cover_cqs.first() {
            c.check(
                isomorphic(&cover.cq.canonical_db(), &ex.guarded_cq.canonical_db()),
                format!("arity {}: cover CQ {:?} not isomorphic to the guarded variant", i, cover.cq),
            );
            let cover_q = cover_omq(&ex.omq, &out.cover_cqs).unwrap();
            // Equivalence over every database with at most i+1 constants:
            // a counterexample exists iff one exists among the minimal
            // models of either side, which is what gets enumerated. For
            // i = 2 the literal corpus is small enough to cross-check the
            // minimal-model route against brute force.
            let (outcome, complete) =
                check_equiv_bounded_domain(&ex.omq, &cover_q, i + 1).unwrap();
            if outcome.is_equivalent_on_corpus() && !complete {
                c.check(
                    false,
                    format!("arity {}: enumeration truncated; equivalence inconclusive", i),
                );
            }
            if i == 2 {
                let corpus = all_databases(&ex.omq.data_schema, i + 1, 1 << 20).unwrap();
                let literal = check_equiv_on_corpus(&ex.omq, &cover_q, &corpus).unwrap();
                c.check(
                    literal.is_equivalent_on_corpus() == outcome.is_equivalent_on_corpus(),
                    format!(
                        "arity 2: literal corpus and minimal-model routes disagree ({:?} vs {:?})",
                        literal, outcome
                    ),
                );
            }
            match outcome {
                EquivOutcome::NoCounterexample { checked } => {
                    c.check(
                        checked > 0,
                        format!("arity {}: empty corpus", i),
                    );
                }
                EquivOutcome::Counterexample { db, left, right } => {
                    // Re-verify both sides before reporting.
                    let l = eval_omq(&ex.omq, &db, None).unwrap();
                    let r = eval_omq(&cover_q, &db, None).unwrap();
                    c.check(
                        false,
                        format!(
                            "arity {}: query and cover disagree on {:?} (query={}, cover={}; re-checked {}/{})",
                            i, db, left, right, l, r
                        ),
                    );
                }
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_4_qi_suite() {
    let mut c = Criterion::start("criterion 4 (query-initiality verdicts)", 30);
    let ex = fixtures::triangle_example();

    let v1 = is_qi_bounded(&ex.d1, &ex.omq, 4).unwrap();
    match &v1 {
        QiVerdict::NotQi {
            witness,
            contraction,
            witness_io,
            reference_io,
        } => {
            c.check(
                hom_exists(witness, &ex.d1),
                "qi witness must map into d1".to_string(),
            );
            c.check(
                eval_omq(&ex.omq, witness, None).unwrap() == OmqVerdict::True,
                "qi witness must entail the query".to_string(),
            );
            let chase_w = run_chase(&ex.omq.ontology, witness, None).unwrap().structure;
            let chase_d = run_chase(&ex.omq.ontology, &ex.d1, None).unwrap().structure;
            c.check(
                omq_core::chase::io_maps(contraction, &chase_w) == *witness_io
                    && omq_core::chase::io_maps(contraction, &chase_d) == *reference_io
                    && witness_io != reference_io,
                "qi discrepancy must re-check".to_string(),
            );
        }
        other => c.check(false, format!("d1 should not be query-initial, got {:?}", other)),
    }

    let v2 = is_qi_bounded(&ex.d2, &ex.omq, 4).unwrap();
    c.check(
        v2.is_qi_within_bound(),
        format!("d2 should be query-initial within bound 4, got {:?}", v2),
    );

    let pair = fixtures::equivalent_pair_example();
    let s1 = is_qi_bounded(&pair.loop_db, &pair.q1, 3).unwrap();
    c.check(
        s1.is_qi_within_bound(),
        format!("loop database should be query-initial for the marker query, got {:?}", s1),
    );
    let s2 = is_qi_bounded(&pair.loop_db, &pair.q2, 3).unwrap();
    c.check(
        s2.is_not_qi(),
        format!("loop database should not be query-initial for the edge query, got {:?}", s2),
    );
    c.finish();
}

fn triangle_reduction_spec() -> (CharDbSpec, omq_core::chase::Omq) {
    let ex = fixtures::triangle_example();
    let db = Structure::new(
        ex.omq.data_schema.clone(),
        ex.divers_db.facts().iter().cloned(),
    )
    .unwrap();
    (CharDbSpec::identity(db, ex.d2.clone()), ex.omq)
}

#[test]
fn criterion_5_reduction_suite() {
    let mut c = Criterion::start("criterion 5 (CSP-to-OMQ agreement, 200 seeded instances)", 300);
    let (spec, q) = triangle_reduction_spec();
    let params = CspParams {
        constants: 5,
        facts: 8,
        schema: q.data_schema.clone(),
    };
    let mut cache = UnravelCache::new();
    let mut agreements = 0usize;
    for seed in 0..200u64 {
        let (spec_drawn, right) =
            generate_random_csp(seed, &params, std::slice::from_ref(&spec)).unwrap();
        let inst = ReductionInstance {
            spec: spec_drawn,
            q: q.clone(),
            right,
            depth: 6,
        };
        let (report, bundle) = verify_with_cache(&inst, &mut cache, Some(seed)).unwrap();
        if report.agree == Some(true) {
            agreements += 1;
        } else {
            let detail = format!(
                "seed {}: csp={:?} omq={} right={:?}",
                seed, report.csp, report.omq, inst.right
            );
            c.check(false, detail);
            if let Some(bundle) = bundle {
                let dir = std::env::temp_dir().join(format!("omq-reduction-seed-{}", seed));
                let _ = bundle.write_to(&dir);
                c.check(false, format!("reproducer bundle written to {}", dir.display()));
            }
        }
        c.check(
            report.sizes.within_budget,
            format!("seed {}: stripped product exceeded |d|*|b| facts", seed),
        );
    }
    c.check(
        agreements == 200,
        format!("agreement rate {}/200", agreements),
    );
    c.finish();
}

#[test]
fn criterion_6_oracle_equivalence() {
    let mut c = Criterion::start("criterion 6 (solver-versus-oracle property tests)", 300);
    let mut rng = SplitMix64::new(0xace5);

    // find_homomorphisms against all-functions enumeration.
    for case in 0..100 {
        let a = random_structure(&mut rng, 4, 5);
        let b = random_structure(&mut rng, 4, 5);
        let solver: BTreeSet<Vec<(Constant, Constant)>> =
            find_homomorphisms(&a, &b, HomMode::Any, None)
                .unwrap()
                .into_iter()
                .map(|h| h.map().iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                .collect();
        let brute = all_function_homs(&a, &b);
        c.check(
            solver == brute,
            format!("case {}: solver found {} homs, enumeration {}", case, solver.len(), brute.len()),
        );
    }

    // Core idempotence and homomorphic equivalence.
    for case in 0..100 {
        let d = random_structure(&mut rng, 5, 7);
        let (core1, retraction) = core_of(&d);
        c.check(
            retraction.verify(&d, &core1),
            format!("core case {}: retraction fails to verify", case),
        );
        c.check(
            hom_equivalent(&d, &core1),
            format!("core case {}: core not equivalent to input", case),
        );
        let (core2, _) = core_of(&core1);
        c.check(
            isomorphic(&core1, &core2),
            format!("core case {}: core not idempotent", case),
        );
        let endos = find_homomorphisms(&core1, &core1, HomMode::Any, None).unwrap();
        c.check(
            endos.iter().all(|h| h.is_injective()),
            format!("core case {}: non-injective endomorphism survives", case),
        );
    }

    // Chase order-independence on guarded Datalog instances.
    for case in 0..50 {
        let (onto, db) = random_gdlog_instance(&mut rng);
        let forward = run_chase(&onto, &db, None).unwrap();
        let reversed = omq_core::chase::Ontology::new(
            onto.rules().iter().rev().cloned().collect(),
        );
        let backward = run_chase(&reversed, &db, None).unwrap();
        c.check(
            forward.structure == backward.structure,
            format!("chase case {}: fixpoints differ under rule reordering", case),
        );
        c.check(
            forward.complete && backward.complete,
            format!("chase case {}: guarded Datalog chase must complete", case),
        );
    }
    c.finish();
}

#[test]
fn criterion_7_diversification_postconditions() {
    let mut c = Criterion::start("criterion 7 (diversification-construction postconditions)", 300);
    let mut violations = 0usize;
    let mut invocations = 0usize;

    // Homomorphisms arising in the cover suite.
    for i in [2usize, 3, 4] {
        let ex = fixtures::clique_example(i);
        let spec = CharDbSpec::identity(ex.guard_db.clone(), ex.base_db.clone());
        let out = cover_cqs_from(&ex.omq, &spec, 4, None, None).unwrap();
        for cover in &out.cover_cqs {
            let p = &ex.omq.query.disjuncts()[cover.disjunct_index];
            invocations += 1;
            if let Err(e) = diversify_from_hom(
                &ex.omq,
                &out.extension,
                &spec.up,
                &spec.base,
                p,
                &cover.hom,
                4,
            ) {
                violations += 1;
                c.check(false, format!("cover arity {}: {}", i, e));
            }
        }
    }

    // Homomorphisms arising in the reduction suite (same seeds as
    // criterion 5).
    let (spec, q) = triangle_reduction_spec();
    let params = CspParams {
        constants: 5,
        facts: 8,
        schema: q.data_schema.clone(),
    };
    let mut cache = UnravelCache::new();
    for seed in 0..200u64 {
        let (spec_drawn, right) =
            generate_random_csp(seed, &params, std::slice::from_ref(&spec)).unwrap();
        let inst = ReductionInstance {
            spec: spec_drawn.clone(),
            q: q.clone(),
            right,
            depth: 6,
        };
        let (report, _) = verify_with_cache(&inst, &mut cache, Some(seed)).unwrap();
        if let Some((di, h)) = &report.witness {
            // Rebuild the extension of the stripped product to feed the
            // construction.
            let extension = ext_once(
                &report.stripped,
                &report.composed_up,
                &spec_drawn.base,
                &q,
                6,
            )
            .unwrap();
            let p = &q.query.disjuncts()[*di];
            invocations += 1;
            if let Err(e) = diversify_from_hom(
                &q,
                &extension,
                &report.composed_up,
                &spec_drawn.base,
                p,
                h,
                6,
            ) {
                violations += 1;
                c.check(false, format!("reduction seed {}: {}", seed, e));
            }
        }
    }
    c.check(invocations > 0, "no homomorphisms exercised".to_string());
    c.check(
        violations == 0,
        format!("{} postcondition violations over {} invocations", violations, invocations),
    );
    c.finish();
}

#[test]
fn criterion_8_width_links() {
    let mut c = Criterion::start("criterion 8 (cover width-link checks)", 60);
    for i in [2usize, 3, 4] {
        let ex = fixtures::clique_example(i);
        let spec = CharDbSpec::identity(ex.guard_db.clone(), ex.base_db.clone());
        let out = cover_cqs_from(&ex.omq, &spec, 4, None, None).unwrap();
        let arity = ex
            .omq
            .data_schema
            .symbols()
            .map(|(_, a)| a)
            .max()
            .unwrap_or(0);
        // Provenance width: the spec database.
        let hd = hypergraph_of_structure(&spec.db);
        let half_d = SubmodularFn::half_cardinality(hd.vertices().clone());
        let (fw_d, _) = f_width(&hd, &half_d).unwrap();
        let (tw_d, _) = treewidth_exact(&hd).unwrap();
        for cover in &out.cover_cqs {
            let hq = hypergraph_of_cq(&cover.cq);
            let half_q = SubmodularFn::half_cardinality(hq.vertices().clone());
            let (fw_q, _) = f_width(&hq, &half_q).unwrap();
            c.check(
                fw_q <= fw_d,
                format!("arity {}: cover f-width {} exceeds provenance f-width {}", i, fw_q, fw_d),
            );
            let (tw_q, _) = treewidth_exact(&hq).unwrap();
            let bound = arity.max(tw_d);
            c.check(
                tw_q <= bound,
                format!("arity {}: cover treewidth {} exceeds max(arity, provenance) = {}", i, tw_q, bound),
            );
        }
    }
    c.finish();
}

// ---- helpers ----

fn random_structure(rng: &mut SplitMix64, max_constants: usize, max_facts: usize) -> Structure {
    let schema = Schema::new([(Sym::from("R"), 2), (Sym::from("P"), 1), (Sym::from("W"), 3)])
        .unwrap();
    let n = 1 + rng.usize_below(max_constants);
    let pool: Vec<Constant> = (0..n)
        .map(|i| Constant::input(format!("r{}", i)))
        .collect();
    let f = rng.usize_below(max_facts + 1);
    let mut facts = BTreeSet::new();
    for _ in 0..f {
        let (rel, arity) = match rng.usize_below(3) {
            0 => ("R", 2),
            1 => ("P", 1),
            _ => ("W", 3),
        };
        let args: Vec<Constant> = (0..arity)
            .map(|_| pool[rng.usize_below(pool.len())].clone())
            .collect();
        facts.insert(Fact::new(rel, args));
    }
    Structure::new(schema, facts).unwrap()
}

/// Oracle: enumerate every function dom(a) -> dom(b) and keep the
/// fact-preserving ones.
fn all_function_homs(a: &Structure, b: &Structure) -> BTreeSet<Vec<(Constant, Constant)>> {
    let dom_a: Vec<Constant> = a.domain().into_iter().collect();
    let dom_b: Vec<Constant> = b.domain().into_iter().collect();
    let mut out = BTreeSet::new();
    if dom_a.is_empty() {
        out.insert(Vec::new());
        return out;
    }
    if dom_b.is_empty() {
        return out;
    }
    let mut choice = vec![0usize; dom_a.len()];
    loop {
        let pairs: Vec<(Constant, Constant)> = dom_a
            .iter()
            .cloned()
            .zip(choice.iter().map(|&i| dom_b[i].clone()))
            .collect();
        let h = Homomorphism::new(pairs.iter().cloned().collect());
        if a.facts()
            .iter()
            .all(|f| h.apply_fact(f).map_or(false, |img| b.contains(&img)))
        {
            out.insert(pairs);
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
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

fn random_gdlog_instance(rng: &mut SplitMix64) -> (omq_core::chase::Ontology, Structure) {
    use omq_core::chase::{Ontology, Tgd};
    use omq_core::query::Atom;
    let vars = ["x", "y", "z"];
    let n_rules = 1 + rng.usize_below(3);
    let mut rules = Vec::new();
    for _ in 0..n_rules {
        // Guard over all three variables keeps every rule guarded Datalog.
        let guard = Atom::new("G", vars.iter().map(|v| Sym::from(*v)).collect());
        let mut body = vec![guard];
        for _ in 0..rng.usize_below(2) {
            let rel = if rng.usize_below(2) == 0 { "E" } else { "P" };
            let arity = if rel == "E" { 2 } else { 1 };
            let args: Vec<Sym> = (0..arity)
                .map(|_| Sym::from(vars[rng.usize_below(3)]))
                .collect();
            body.push(Atom::new(rel, args));
        }
        let mut head = Vec::new();
        for _ in 0..(1 + rng.usize_below(2)) {
            let rel = if rng.usize_below(2) == 0 { "E" } else { "P" };
            let arity = if rel == "E" { 2 } else { 1 };
            let args: Vec<Sym> = (0..arity)
                .map(|_| Sym::from(vars[rng.usize_below(3)]))
                .collect();
            head.push(Atom::new(rel, args));
        }
        rules.push(Tgd::new(body, head).unwrap());
    }
    let onto = Ontology::new(rules);
    assert!(onto.is_gdlog());

    let schema = Schema::new([
        (Sym::from("G"), 3),
        (Sym::from("E"), 2),
        (Sym::from("P"), 1),
    ])
    .unwrap();
    let n = 1 + rng.usize_below(4);
    let pool: Vec<Constant> = (0..n)
        .map(|i| Constant::input(format!("g{}", i)))
        .collect();
    let mut facts = BTreeSet::new();
    for _ in 0..rng.usize_below(7) {
        let (rel, arity) = match rng.usize_below(3) {
            0 => ("G", 3),
            1 => ("E", 2),
            _ => ("P", 1),
        };
        let args: Vec<Constant> = (0..arity)
            .map(|_| pool[rng.usize_below(pool.len())].clone())
            .collect();
        facts.insert(Fact::new(rel, args));
    }
    (onto, Structure::new(schema, facts).unwrap())
}
