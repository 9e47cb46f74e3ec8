//! End-to-end tests of the binary against the demo workspace: verdicts,
//! exit codes, determinism, and the serialize/parse round trip.

use std::path::PathBuf;
use std::process::{Command, Output};

use omq_cli::workspace::Workspace;
use omq_core::textio;

fn demo(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../demo")
        .join(file)
}

fn omq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn triangle() -> String {
    demo("triangle.omq").display().to_string()
}

fn clique() -> String {
    demo("clique3.omq").display().to_string()
}

#[test]
fn eval_verdicts_and_exit_codes() {
    let t = triangle();
    let out = omq(&["-w", &t, "eval", "--omq", "Q", "--db", "d2"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("verdict=true"));

    let out = omq(&["-w", &t, "eval", "--omq", "Q", "--db", "dmin"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("verdict=false"));

    let out = omq(&["-w", &t, "eval", "--omq", "Q", "--db", "missing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chase_reports_levels() {
    let t = triangle();
    let out = omq(&["-w", &t, "chase", "--omq", "Q", "--db", "d2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("complete=true"));
    assert!(text.contains("fact=T(c,a) level=1"));
    assert!(text.contains("fact=R(a,b) level=0"));
}

#[test]
fn hom_finds_witness_or_fails() {
    let t = triangle();
    let out = omq(&["-w", &t, "hom", "--from", "d2", "--to", "d1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("hom=a->a,b->b,c->a,d->d"));

    let out = omq(&["-w", &t, "hom", "--from", "d1", "--to", "dmin"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn width_commands() {
    let c = clique();
    let out = omq(&["-w", &c, "width", "fwidth", "--query", "q3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("fwidth=3/2"));

    let out = omq(&["-w", &c, "width", "tw", "--query", "q3"]);
    assert!(stdout(&out).contains("treewidth=3"));

    let out = omq(&["-w", &c, "width", "bracket", "--query", "q3g"]);
    let text = stdout(&out);
    assert!(text.contains("upper=1"), "got: {}", text);
}

#[test]
fn qicheck_split() {
    let t = triangle();
    let out = omq(&["-w", &t, "qicheck", "--db", "d2", "--omq", "Q", "--bound", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("qi=within-bound"));

    let out = omq(&["-w", &t, "qicheck", "--db", "d1", "--omq", "Q", "--bound", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("qi=not-qi"));
    assert!(text.contains("witness_fact="));
}

#[test]
fn cover_produces_guarded_variant() {
    let c = clique();
    let out = omq(&["-w", &c, "cover", "--omq", "Q3", "--chardb", "c3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("cover_cqs=1"), "got: {}", text);
    assert!(text.contains("S(v"), "guard atom missing: {}", text);
}

#[test]
fn adorn_check_single_bag() {
    let c = clique();
    let out = omq(&[
        "-w", &c, "adorn-check", "--query", "q3", "--td", "t3", "--chardb", "c3", "--omq", "Q3",
    ]);
    // The clique query's variables do not occur in the guard database, so
    // this adornment is invalid; the image query over the guard constants
    // would be valid, which the acceptance-level tests cover.
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("valid=false"));
}

#[test]
fn equivalence_commands() {
    let c = clique();
    let out = omq(&[
        "-w", &c, "equiv-corpus", "--left", "Q3", "--right", "Q3G", "--bounded-domain", "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("equivalent=counterexample"), "got: {}", text);
    assert!(text.contains("counterexample_fact="));

    let out = omq(&[
        "-w", &c, "equiv-corpus", "--left", "Q3", "--right", "Q3", "--corpus", "base3", "--corpus", "guard3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("equivalent=no-counterexample checked=2"));
}

#[test]
fn reduction_commands() {
    let t = triangle();
    let out = omq(&[
        "-w", &t, "verify-reduction", "--chardb", "cmin", "--omq", "Q", "--right", "b1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("csp=true omq=true agree=true"), "got: {}", text);

    let out = omq(&[
        "-w", &t, "verify-reduction", "--chardb", "cmin", "--omq", "Q", "--right", "b2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("csp=false omq=false agree=true"));
}

#[test]
fn gen_csp_is_deterministic() {
    let t = triangle();
    let args = [
        "-w", &t, "gen-csp", "--seed", "11", "--constants", "5", "--facts", "8",
        "--omq", "Q", "--chardb", "cmin",
    ];
    let first = stdout(&omq(&args));
    let second = stdout(&omq(&args));
    assert_eq!(first, second);
    assert!(first.contains("structure right {"));
}

#[test]
fn unravel_command_restores_ternary_copy() {
    let t = triangle();
    let out = omq(&[
        "-w", &t, "unravel", "--db", "d2", "--at", "a,c", "--depth", "2", "--omq", "Q",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("fact=U(c,d~"), "expected a fresh ternary copy: {}", text);
}

#[test]
fn three_valued_evaluation_with_depth_budget() {
    let e = demo("existential.omq").display().to_string();
    let out = omq(&["-w", &e, "eval", "--omq", "GROW", "--db", "start", "--depth", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("verdict=unknown"));

    let out = omq(&["-w", &e, "eval", "--omq", "GROW", "--db", "start", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("verdict=true"));

    // Without a budget the chase cannot run at all.
    let out = omq(&["-w", &e, "eval", "--omq", "GROW", "--db", "start"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn human_format_prints_prose() {
    let t = triangle();
    let out = omq(&["-w", &t, "--format", "human", "eval", "--omq", "Q", "--db", "d2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("entailed"));

    let out = omq(&["-w", &t, "--format", "human", "chase", "--omq", "Q", "--db", "d2"]);
    assert!(stdout(&out).contains("chase reached level"));
}

#[test]
fn workspace_round_trips() {
    let ws = Workspace::load(&[demo("triangle.omq"), demo("clique3.omq")]).unwrap();
    assert!(ws.omqs.contains_key("Q") && ws.omqs.contains_key("Q3"));
    for (name, s) in &ws.structures {
        let text = textio::serialize_structure(name, s);
        let parsed = textio::parse_file("rt", &text).unwrap();
        assert_eq!(&parsed.structures[0].1, s, "structure {} round-trips", name);
    }
    for (name, o) in &ws.ontologies {
        let text = textio::serialize_ontology(name, o);
        let parsed = textio::parse_file("rt", &text).unwrap();
        assert_eq!(&parsed.ontologies[0].1, o, "ontology {} round-trips", name);
    }
    for (name, q) in &ws.queries {
        let text = textio::serialize_query(name, q);
        let parsed = textio::parse_file("rt", &text).unwrap();
        assert_eq!(&parsed.queries[0].1, q, "query {} round-trips", name);
    }
}

#[test]
fn dangling_references_are_reported() {
    let err = omq_cli::workspace::load_from_strings(&[(
        "bad.omq",
        "omq Q { ontology nope. schema R/2. query missing. }",
    )])
    .err()
    .expect("dangling reference should fail");
    let msg = format!("{}", err);
    assert!(msg.contains("unknown"), "got: {}", msg);
}
