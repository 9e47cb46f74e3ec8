//! Report rendering: a stable line-oriented key-value format for machines,
//! free-form text for humans. Both are deterministic.
//!
//! Machine reports start with a single `key=value ...` summary line;
//! payload lines follow, one item each, prefixed with their kind, e.g.
//! `fact=R(a,b)` or `map=c->a`.

use omq_core::chase::{ChaseResult, OmqVerdict};
use omq_core::cover::{AdornmentReport, CoverOutput, EquivOutcome};
use omq_core::relstruct::{GuardedAnalysis, Homomorphism, Structure};
use omq_core::reduction::ReductionReport;
use omq_core::unravel::{MdivReport, QiVerdict, UnravelingResult};
use omq_core::width::{TreeDecomposition, WidthBracket};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Human,
    Machine,
}

pub fn hom_line(h: &Homomorphism) -> String {
    h.map()
        .iter()
        .map(|(k, v)| format!("{}->{}", k, v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn structure_lines(prefix: &str, s: &Structure, out: &mut String) {
    for f in s.facts() {
        out.push_str(&format!("{}={}\n", prefix, f));
    }
}

pub fn verdict(v: OmqVerdict) -> &'static str {
    match v {
        OmqVerdict::True => "true",
        OmqVerdict::False => "false",
        OmqVerdict::Unknown => "unknown",
    }
}

pub fn eval_report(mode: Mode, v: OmqVerdict, witness: Option<&(usize, Homomorphism)>, depth: Option<usize>) -> String {
    match mode {
        Mode::Machine => {
            let mut out = format!(
                "verdict={} depth={}\n",
                verdict(v),
                depth.map_or("none".to_string(), |d| d.to_string())
            );
            if let Some((i, h)) = witness {
                out.push_str(&format!("disjunct={}\n", i));
                out.push_str(&format!("witness={}\n", hom_line(h)));
            }
            out
        }
        Mode::Human => match witness {
            Some((i, h)) => format!(
                "entailed: disjunct {} maps via {}\n",
                i,
                hom_line(h)
            ),
            None => format!("verdict: {}\n", verdict(v)),
        },
    }
}

pub fn chase_report(mode: Mode, r: &ChaseResult) -> String {
    match mode {
        Mode::Machine => {
            let mut out = format!(
                "facts={} complete={} rounds={}\n",
                r.structure.len(),
                r.complete,
                r.rounds
            );
            for f in r.structure.facts() {
                out.push_str(&format!("fact={} level={}\n", f, r.levels[f]));
            }
            out
        }
        Mode::Human => {
            let mut out = format!(
                "chase reached level {} ({}complete), {} facts:\n",
                r.rounds,
                if r.complete { "" } else { "in" },
                r.structure.len()
            );
            for f in r.structure.facts() {
                out.push_str(&format!("  [{}] {}\n", r.levels[f], f));
            }
            out
        }
    }
}

pub fn homs_report(mode: Mode, homs: &[Homomorphism], limit: Option<usize>) -> String {
    match mode {
        Mode::Machine => {
            let mut out = format!(
                "count={} limit={}\n",
                homs.len(),
                limit.map_or("none".to_string(), |l| l.to_string())
            );
            for h in homs {
                out.push_str(&format!("hom={}\n", hom_line(h)));
            }
            out
        }
        Mode::Human => {
            let mut out = format!("{} homomorphism(s)\n", homs.len());
            for h in homs {
                out.push_str(&format!("  {}\n", hom_line(h)));
            }
            out
        }
    }
}

pub fn core_report(mode: Mode, core: &Structure, retraction: &Homomorphism) -> String {
    let mut out = match mode {
        Mode::Machine => format!(
            "core_facts={} core_constants={}\n",
            core.len(),
            core.domain().len()
        ),
        Mode::Human => format!(
            "core has {} facts over {} constants\n",
            core.len(),
            core.domain().len()
        ),
    };
    structure_lines("fact", core, &mut out);
    out.push_str(&format!("retraction={}\n", hom_line(retraction)));
    out
}

pub fn guarded_report(mode: Mode, ga: &GuardedAnalysis) -> String {
    let mut out = String::new();
    let kernel = ga
        .kernel
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",");
    match mode {
        Mode::Machine => out.push_str(&format!(
            "maximal_guarded_sets={} kernel={}\n",
            ga.maximal_guarded_sets.len(),
            kernel
        )),
        Mode::Human => out.push_str(&format!("kernel: {{{}}}\n", kernel)),
    }
    for s in &ga.maximal_guarded_sets {
        let set = s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!("guarded_set={}\n", set));
    }
    out
}

pub fn treedec_lines(td: &TreeDecomposition, out: &mut String) {
    for (i, bag) in td.bags.iter().enumerate() {
        let vs = bag
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        match td.parent[i] {
            None => out.push_str(&format!("bag={}:{}\n", i, vs)),
            Some(p) => out.push_str(&format!("bag={}<-{}:{}\n", i, p, vs)),
        }
    }
}

pub fn bracket_report(mode: Mode, b: &WidthBracket) -> String {
    let witness = b
        .lower_witness
        .as_deref()
        .map(|w| format!("f:{}", w))
        .unwrap_or_else(|| "none".to_string());
    let mut out = format!(
        "lower={} upper={} lower_witness={} method={}\n",
        b.lower, b.upper, witness, b.method
    );
    if mode == Mode::Machine {
        for r in &b.rejected {
            out.push_str(&format!("rejected=f:{}\n", r));
        }
        treedec_lines(&b.upper_witness, &mut out);
    }
    out
}

pub fn unravel_report(mode: Mode, u: &UnravelingResult) -> String {
    let mut out = format!(
        "facts={} depth={} stabilized={} exhausted={}\n",
        u.structure.len(),
        u.depth,
        u.stabilized,
        u.exhausted
    );
    structure_lines("fact", &u.structure, &mut out);
    if mode == Mode::Machine {
        treedec_lines(&u.decomposition, &mut out);
    }
    out
}

pub fn qi_report(mode: Mode, v: &QiVerdict, bound: usize) -> String {
    match v {
        QiVerdict::QiWithinBound { bound } => format!("qi=within-bound bound={}\n", bound),
        QiVerdict::Unknown { reason } => format!("qi=unknown bound={} reason={}\n", bound, reason),
        QiVerdict::NotQi {
            witness,
            contraction,
            witness_io,
            reference_io,
        } => {
            let mut out = format!(
                "qi=not-qi bound={} witness_io={} reference_io={}\n",
                bound, witness_io, reference_io
            );
            out.push_str(&format!("contraction={}\n", contraction));
            structure_lines("witness_fact", witness, &mut out);
            if mode == Mode::Human {
                out.push_str("the witness maps into the database, entails the query, and disagrees on the contraction\n");
            }
            out
        }
    }
}

pub fn mdiv_report(mode: Mode, r: &MdivReport) -> String {
    let mut out = format!(
        "members={} complete={}\n",
        r.members.len(),
        r.complete
    );
    for (i, m) in r.members.iter().enumerate() {
        out.push_str(&format!("member={} map={}\n", i, hom_line(&m.up)));
        for f in m.db.facts() {
            out.push_str(&format!("member_{}_fact={}\n", i, f));
        }
    }
    if mode == Mode::Human && r.members.is_empty() {
        out.push_str("no minimal diversifications within the budget\n");
    }
    out
}

pub fn cover_report(mode: Mode, c: &CoverOutput) -> String {
    let mut out = format!(
        "cover_cqs={} truncated={} over_budget={}\n",
        c.cover_cqs.len(),
        c.truncated,
        c.over_budget
    );
    for (i, cq) in c.cover_cqs.iter().enumerate() {
        out.push_str(&format!("cq={} :- {}\n", i, cq.cq));
        if mode == Mode::Machine {
            out.push_str(&format!("cq_{}_disjunct={}\n", i, cq.disjunct_index));
            out.push_str(&format!("cq_{}_hom={}\n", i, hom_line(&cq.hom)));
        }
    }
    out
}

pub fn adorn_report(_mode: Mode, r: &AdornmentReport) -> String {
    let mut out = format!("valid={}\n", r.valid);
    for f in &r.failures {
        out.push_str(&format!("failure={}\n", f));
    }
    out
}

pub fn equiv_report(_mode: Mode, outcome: &EquivOutcome) -> String {
    match outcome {
        EquivOutcome::NoCounterexample { checked } => {
            format!("equivalent=no-counterexample checked={}\n", checked)
        }
        EquivOutcome::Counterexample { db, left, right } => {
            let mut out = format!(
                "equivalent=counterexample left={} right={}\n",
                verdict(*left),
                verdict(*right)
            );
            structure_lines("counterexample_fact", db, &mut out);
            out
        }
    }
}

pub fn reduction_report(mode: Mode, r: &ReductionReport, depth: usize) -> String {
    let mut out = format!(
        "csp={} omq={} agree={} depth={}\n",
        r.csp.map_or("none".to_string(), |b| b.to_string()),
        verdict(r.omq),
        r.agree.map_or("none".to_string(), |b| b.to_string()),
        depth
    );
    out.push_str(&format!(
        "left_facts={} right_facts={} product_facts={} stripped_facts={} extension_facts={} within_budget={} stabilized={}\n",
        r.sizes.left_facts,
        r.sizes.right_facts,
        r.sizes.product_facts,
        r.sizes.stripped_facts,
        r.sizes.extension_facts,
        r.sizes.within_budget,
        r.sizes.stabilized
    ));
    if mode == Mode::Machine {
        if let Some((i, h)) = &r.witness {
            out.push_str(&format!("disjunct={}\n", i));
            out.push_str(&format!("witness={}\n", hom_line(h)));
        }
        structure_lines("stripped_fact", &r.stripped, &mut out);
    }
    out
}
