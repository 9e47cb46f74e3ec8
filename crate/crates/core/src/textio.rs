//! Line-oriented text formats for structures, ontologies, queries, OMQs,
//! characteristic-database specifications, and tree decompositions.
//!
//! Files hold named blocks:
//!
//! ```text
//! structure d2 {
//!   R(a,b). W(d,b,c). U(c,d,a). V(c,a).
//! }
//! ontology omega {
//!   U(x,y,z), V(x,z) -> T(x,z).
//!   W(x,y,z) -> S(y,z).
//! }
//! query q {
//!   q :- R(x,y), S(y,z), T(z,x).
//! }
//! omq Q {
//!   ontology omega.
//!   schema R/2, U/3, V/2, W/3.
//!   query q.
//! }
//! chardb cd {
//!   db d. base d2. map a->a, b->b, c->c, d->d. qi within-bound 4. mdiv checked.
//! }
//! treedec t {
//!   node 0: a, b.
//!   node 1 parent 0: b, c.
//! }
//! ```
//!
//! A file without block headers is read as bare statements: facts collect
//! into a structure named after the file, rules into an ontology, and
//! `name :- ...` lines into queries. In rules and queries every term is a
//! variable; in facts every term is a constant and a leading-uppercase name
//! is rejected. `#` starts a line comment.

use std::collections::BTreeSet;
use std::fmt;

use crate::chase::{Omq, Ontology, Tgd};
use crate::query::{Atom, Cq, Ucq};
use crate::relstruct::{Constant, Fact, Schema, Structure, Sym};
use crate::width::TreeDecomposition;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// OMQ block with by-name references, resolved by the workspace layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedOmq {
    pub ontology_ref: String,
    pub schema: Schema,
    pub query_ref: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QiTag {
    WithinBound(usize),
    NotQi,
    Unknown,
}

/// Characteristic-database block with by-name references.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedCharDb {
    pub db_ref: String,
    pub base_ref: String,
    /// Constant-name pairs; empty means the identity map.
    pub map: Vec<(String, String)>,
    pub qi: QiTag,
    pub mdiv_checked: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedFile {
    pub structures: Vec<(String, Structure)>,
    pub ontologies: Vec<(String, Ontology)>,
    pub queries: Vec<(String, Ucq)>,
    pub omqs: Vec<(String, ParsedOmq)>,
    pub chardbs: Vec<(String, ParsedCharDb)>,
    pub treedecs: Vec<(String, TreeDecomposition)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Slash,
    Colon,
    Arrow,     // ->
    Turnstile, // :-
}

struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Clone, Copy, Debug)]
struct At {
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(file: &'a str, text: &str) -> Lexer<'a> {
        Lexer {
            file,
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, at: At, msg: impl Into<String>) -> ParseError {
        ParseError {
            file: self.file.to_string(),
            line: at.line,
            col: at.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, At)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == '#' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let at = At {
                line: self.line,
                col: self.col,
            };
            let Some(c) = self.peek() else {
                return Ok(out);
            };
            if is_ident_char(c) {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if is_ident_char(c) {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), at));
                continue;
            }
            self.bump();
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '/' => Tok::Slash,
                ':' => {
                    if self.peek() == Some('-') {
                        self.bump();
                        Tok::Turnstile
                    } else {
                        Tok::Colon
                    }
                }
                '-' => {
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.error(at, "stray '-'"));
                    }
                }
                other => {
                    return Err(self.error(at, format!("unexpected character '{}'", other)));
                }
            };
            out.push((tok, at));
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '~' | '*' | '@')
}

struct Parser<'a> {
    file: &'a str,
    toks: Vec<(Tok, At)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        let at = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|(_, a)| *a)
            .unwrap_or(At { line: 1, col: 1 });
        ParseError {
            file: self.file.to_string(),
            line: at.line,
            col: at.col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(self.clone_err(format!("expected {}, found {:?}", what, t))),
            None => Err(self.error(format!("expected {}, found end of input", what))),
        }
    }

    fn clone_err(&self, msg: impl Into<String>) -> ParseError {
        let at = self
            .toks
            .get(self.pos.saturating_sub(1))
            .map(|(_, a)| *a)
            .unwrap_or(At { line: 1, col: 1 });
        ParseError {
            file: self.file.to_string(),
            line: at.line,
            col: at.col,
            msg: msg.into(),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(other) => Err(self.clone_err(format!("expected {}, found {:?}", what, other))),
            None => Err(self.clone_err(format!("expected {}, found end of input", what))),
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ParseError> {
        let s = self.ident(what)?;
        s.parse()
            .map_err(|_| self.clone_err(format!("expected {}, found '{}'", what, s)))
    }

    /// `R(t1,...,tn)`.
    fn atom_terms(&mut self) -> Result<(String, Vec<String>), ParseError> {
        let rel = self.ident("a relation name")?;
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        loop {
            args.push(self.ident("a term")?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                other => return Err(self.clone_err(format!("expected ',' or ')', found {:?}", other))),
            }
        }
        Ok((rel, args))
    }

    fn fact(&mut self) -> Result<Fact, ParseError> {
        let (rel, args) = self.atom_terms()?;
        for a in &args {
            if a.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                return Err(self.clone_err(format!(
                    "'{}' looks like a variable (leading uppercase) in a fact position",
                    a
                )));
            }
        }
        Ok(Fact::new(
            rel,
            args.into_iter().map(Constant::input).collect(),
        ))
    }

    fn var_atom(&mut self) -> Result<Atom, ParseError> {
        let (rel, args) = self.atom_terms()?;
        Ok(Atom::new(rel, args.into_iter().map(Sym::from).collect()))
    }

    /// Comma-separated atoms up to (not consuming) a terminator token.
    fn atom_list(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut atoms = vec![self.var_atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.next();
            atoms.push(self.var_atom()?);
        }
        Ok(atoms)
    }

    /// `body -> [exists z1,...,zk:] head .` with the leading body already
    /// unparsed.
    fn rule(&mut self) -> Result<Tgd, ParseError> {
        let body = self.atom_list()?;
        self.expect(Tok::Arrow, "'->'")?;
        let mut declared_exists: Vec<String> = Vec::new();
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "exists" && self.peek2() != Some(&Tok::LParen) {
                self.next();
                loop {
                    declared_exists.push(self.ident("an existential variable")?);
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::Colon) => break,
                        other => {
                            return Err(self.clone_err(format!(
                                "expected ',' or ':' in exists clause, found {:?}",
                                other
                            )))
                        }
                    }
                }
            }
        }
        let head = self.atom_list()?;
        self.expect(Tok::Dot, "'.'")?;
        let tgd = Tgd::new(body, head).map_err(|e| self.clone_err(e.to_string()))?;
        if !declared_exists.is_empty() {
            let inferred: BTreeSet<String> = tgd
                .existential_vars()
                .into_iter()
                .map(|v| v.as_str().to_string())
                .collect();
            let declared: BTreeSet<String> = declared_exists.into_iter().collect();
            if inferred != declared {
                return Err(self.clone_err(format!(
                    "declared existential variables {:?} do not match inferred {:?}",
                    declared, inferred
                )));
            }
        }
        Ok(tgd)
    }

    /// `schema R/2, S/3 .` with `schema` already consumed.
    fn schema_decl(&mut self) -> Result<Schema, ParseError> {
        let mut symbols = Vec::new();
        loop {
            let rel = self.ident("a relation name")?;
            self.expect(Tok::Slash, "'/'")?;
            let arity = self.number("an arity")?;
            symbols.push((Sym::from(rel), arity));
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Dot) => break,
                other => {
                    return Err(self.clone_err(format!("expected ',' or '.', found {:?}", other)))
                }
            }
        }
        Schema::new(symbols).map_err(|e| self.clone_err(e.to_string()))
    }
}

/// Parse one file's text. `file_label` is used in error positions and as
/// the name for bare (block-less) content.
pub fn parse_file(file_label: &str, text: &str) -> Result<ParsedFile, ParseError> {
    let toks = Lexer::new(file_label, text).tokens()?;
    let mut p = Parser {
        file: file_label,
        toks,
        pos: 0,
    };
    let mut out = ParsedFile::default();

    // Bare content: facts, rules, and query lines without block headers.
    let mut bare_facts: Vec<Fact> = Vec::new();
    let mut bare_rules: Vec<Tgd> = Vec::new();
    let mut bare_queries: Vec<(String, Vec<Cq>)> = Vec::new();

    while let Some(tok) = p.peek() {
        match tok {
            Tok::Ident(kw) if kw == "structure" && p.peek2().is_some_and(is_name_tok) => {
                p.next();
                let name = p.ident("a structure name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut facts = Vec::new();
                while p.peek() != Some(&Tok::RBrace) {
                    let f = p.fact()?;
                    p.expect(Tok::Dot, "'.'")?;
                    facts.push(f);
                }
                p.expect(Tok::RBrace, "'}'")?;
                let schema = Schema::new(
                    facts.iter().map(|f| (f.rel.clone(), f.args.len())),
                )
                .map_err(|e| p.clone_err(e.to_string()))?;
                let s = Structure::new(schema, facts).map_err(|e| p.clone_err(e.to_string()))?;
                out.structures.push((name, s));
            }
            Tok::Ident(kw) if kw == "ontology" && p.peek2().is_some_and(is_name_tok) => {
                p.next();
                let name = p.ident("an ontology name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut rules = Vec::new();
                while p.peek() != Some(&Tok::RBrace) {
                    rules.push(p.rule()?);
                }
                p.expect(Tok::RBrace, "'}'")?;
                out.ontologies.push((name, Ontology::new(rules)));
            }
            Tok::Ident(kw) if kw == "query" && p.peek2().is_some_and(is_name_tok) => {
                p.next();
                let name = p.ident("a query name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut disjuncts = Vec::new();
                while p.peek() != Some(&Tok::RBrace) {
                    let head = p.ident("the query head")?;
                    if head != name {
                        return Err(p.clone_err(format!(
                            "disjunct head '{}' does not match query name '{}'",
                            head, name
                        )));
                    }
                    p.expect(Tok::Turnstile, "':-'")?;
                    let atoms = p.atom_list()?;
                    p.expect(Tok::Dot, "'.'")?;
                    disjuncts.push(Cq::new(atoms).map_err(|e| p.clone_err(e.to_string()))?);
                }
                p.expect(Tok::RBrace, "'}'")?;
                let ucq = Ucq::new(disjuncts).map_err(|e| p.clone_err(e.to_string()))?;
                out.queries.push((name, ucq));
            }
            Tok::Ident(kw) if kw == "omq" => {
                p.next();
                let name = p.ident("an OMQ name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut ontology_ref = None;
                let mut schema = None;
                let mut query_ref = None;
                while p.peek() != Some(&Tok::RBrace) {
                    let kw = p.ident("'ontology', 'schema', or 'query'")?;
                    match kw.as_str() {
                        "ontology" => {
                            ontology_ref = Some(p.ident("an ontology name")?);
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        "schema" => schema = Some(p.schema_decl()?),
                        "query" => {
                            query_ref = Some(p.ident("a query name")?);
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        other => {
                            return Err(
                                p.clone_err(format!("unknown OMQ field '{}'", other))
                            )
                        }
                    }
                }
                p.expect(Tok::RBrace, "'}'")?;
                let (Some(ontology_ref), Some(schema), Some(query_ref)) =
                    (ontology_ref, schema, query_ref)
                else {
                    return Err(p.clone_err("OMQ needs ontology, schema, and query fields"));
                };
                out.omqs.push((
                    name,
                    ParsedOmq {
                        ontology_ref,
                        schema,
                        query_ref,
                    },
                ));
            }
            Tok::Ident(kw) if kw == "chardb" => {
                p.next();
                let name = p.ident("a chardb name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut db_ref = None;
                let mut base_ref = None;
                let mut map = Vec::new();
                let mut qi = QiTag::Unknown;
                let mut mdiv_checked = false;
                while p.peek() != Some(&Tok::RBrace) {
                    let kw = p.ident("a chardb field")?;
                    match kw.as_str() {
                        "db" => {
                            db_ref = Some(p.ident("a structure name")?);
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        "base" => {
                            base_ref = Some(p.ident("a structure name")?);
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        "map" => {
                            if let Some(Tok::Ident(s)) = p.peek() {
                                if s == "identity" {
                                    p.next();
                                    p.expect(Tok::Dot, "'.'")?;
                                    continue;
                                }
                            }
                            loop {
                                let from = p.ident("a constant")?;
                                p.expect(Tok::Arrow, "'->'")?;
                                let to = p.ident("a constant")?;
                                map.push((from, to));
                                match p.next() {
                                    Some(Tok::Comma) => continue,
                                    Some(Tok::Dot) => break,
                                    other => {
                                        return Err(p.clone_err(format!(
                                            "expected ',' or '.', found {:?}",
                                            other
                                        )))
                                    }
                                }
                            }
                        }
                        "qi" => {
                            let tag = p.ident("a qi tag")?;
                            qi = match tag.as_str() {
                                "unknown" => QiTag::Unknown,
                                "not" => {
                                    let rest = p.ident("'qi'")?;
                                    if rest != "qi" {
                                        return Err(p.clone_err("expected 'not qi'"));
                                    }
                                    QiTag::NotQi
                                }
                                "within" => {
                                    let rest = p.ident("'bound'")?;
                                    if rest != "bound" {
                                        return Err(p.clone_err("expected 'within bound N'"));
                                    }
                                    QiTag::WithinBound(p.number("a bound")?)
                                }
                                other => {
                                    return Err(p.clone_err(format!("unknown qi tag '{}'", other)))
                                }
                            };
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        "mdiv" => {
                            let tag = p.ident("'checked' or 'unchecked'")?;
                            mdiv_checked = match tag.as_str() {
                                "checked" => true,
                                "unchecked" => false,
                                other => {
                                    return Err(
                                        p.clone_err(format!("unknown mdiv tag '{}'", other))
                                    )
                                }
                            };
                            p.expect(Tok::Dot, "'.'")?;
                        }
                        other => {
                            return Err(p.clone_err(format!("unknown chardb field '{}'", other)))
                        }
                    }
                }
                p.expect(Tok::RBrace, "'}'")?;
                let (Some(db_ref), Some(base_ref)) = (db_ref, base_ref) else {
                    return Err(p.clone_err("chardb needs db and base fields"));
                };
                out.chardbs.push((
                    name,
                    ParsedCharDb {
                        db_ref,
                        base_ref,
                        map,
                        qi,
                        mdiv_checked,
                    },
                ));
            }
            Tok::Ident(kw) if kw == "treedec" => {
                p.next();
                let name = p.ident("a treedec name")?;
                p.expect(Tok::LBrace, "'{'")?;
                let mut bags: Vec<(usize, Option<usize>, BTreeSet<Sym>)> = Vec::new();
                while p.peek() != Some(&Tok::RBrace) {
                    let kw = p.ident("'node'")?;
                    if kw != "node" {
                        return Err(p.clone_err(format!("expected 'node', found '{}'", kw)));
                    }
                    let id = p.number("a node id")?;
                    let mut parent = None;
                    if let Some(Tok::Ident(s)) = p.peek() {
                        if s == "parent" {
                            p.next();
                            parent = Some(p.number("a parent id")?);
                        }
                    }
                    p.expect(Tok::Colon, "':'")?;
                    let mut bag = BTreeSet::new();
                    loop {
                        bag.insert(Sym::from(p.ident("a vertex")?));
                        match p.next() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::Dot) => break,
                            other => {
                                return Err(p.clone_err(format!(
                                    "expected ',' or '.', found {:?}",
                                    other
                                )))
                            }
                        }
                    }
                    bags.push((id, parent, bag));
                }
                p.expect(Tok::RBrace, "'}'")?;
                bags.sort_by_key(|(id, _, _)| *id);
                for (expect_id, (id, _, _)) in bags.iter().enumerate() {
                    if *id != expect_id {
                        return Err(p.clone_err(format!(
                            "node ids must be 0..n in order, missing {}",
                            expect_id
                        )));
                    }
                }
                let td = TreeDecomposition {
                    parent: bags.iter().map(|(_, p, _)| *p).collect(),
                    bags: bags.into_iter().map(|(_, _, b)| b).collect(),
                };
                out.treedecs.push((name, td));
            }
            _ => {
                // Bare statement: query line, rule, or fact.
                if matches!(p.peek(), Some(Tok::Ident(_))) && p.peek2() == Some(&Tok::Turnstile) {
                    let name = p.ident("a query name")?;
                    p.next(); // :-
                    let atoms = p.atom_list()?;
                    p.expect(Tok::Dot, "'.'")?;
                    let cq = Cq::new(atoms).map_err(|e| p.clone_err(e.to_string()))?;
                    match bare_queries.iter_mut().find(|(n, _)| *n == name) {
                        Some((_, ds)) => ds.push(cq),
                        None => bare_queries.push((name, vec![cq])),
                    }
                    continue;
                }
                // A rule has '->' before its terminating '.'.
                let is_rule = p.toks[p.pos..]
                    .iter()
                    .map(|(t, _)| t)
                    .find(|t| matches!(t, Tok::Arrow | Tok::Dot))
                    == Some(&Tok::Arrow);
                if is_rule {
                    bare_rules.push(p.rule()?);
                } else {
                    let f = p.fact()?;
                    p.expect(Tok::Dot, "'.'")?;
                    bare_facts.push(f);
                }
            }
        }
    }

    if !bare_facts.is_empty() {
        let schema = Schema::new(
            bare_facts.iter().map(|f| (f.rel.clone(), f.args.len())),
        )
        .map_err(|e| p.clone_err(e.to_string()))?;
        let s =
            Structure::new(schema, bare_facts).map_err(|e| p.clone_err(e.to_string()))?;
        out.structures.push((file_label.to_string(), s));
    }
    if !bare_rules.is_empty() {
        out.ontologies
            .push((file_label.to_string(), Ontology::new(bare_rules)));
    }
    for (name, disjuncts) in bare_queries {
        let ucq = Ucq::new(disjuncts).map_err(|e| p.clone_err(e.to_string()))?;
        out.queries.push((name, ucq));
    }
    Ok(out)
}

fn is_name_tok(t: &Tok) -> bool {
    matches!(t, Tok::Ident(_))
}

pub fn serialize_structure(name: &str, s: &Structure) -> String {
    let mut out = format!("structure {} {{\n", name);
    for f in s.facts() {
        out.push_str(&format!("  {}.\n", f));
    }
    out.push_str("}\n");
    out
}

pub fn serialize_ontology(name: &str, o: &Ontology) -> String {
    let mut out = format!("ontology {} {{\n", name);
    for r in o.rules() {
        out.push_str(&format!("  {}.\n", r));
    }
    out.push_str("}\n");
    out
}

pub fn serialize_query(name: &str, q: &Ucq) -> String {
    let mut out = format!("query {} {{\n", name);
    for d in q.disjuncts() {
        out.push_str(&format!("  {} :- {}.\n", name, d));
    }
    out.push_str("}\n");
    out
}

pub fn serialize_schema(s: &Schema) -> String {
    s.symbols()
        .map(|(sym, a)| format!("{}/{}", sym, a))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn serialize_omq(name: &str, omq: &Omq, ontology_name: &str, query_name: &str) -> String {
    format!(
        "omq {} {{\n  ontology {}.\n  schema {}.\n  query {}.\n}}\n",
        name,
        ontology_name,
        serialize_schema(&omq.data_schema),
        query_name
    )
}

pub fn serialize_chardb_block(
    name: &str,
    db_name: &str,
    base_name: &str,
    map: &[(String, String)],
) -> String {
    let map_line = if map.is_empty() {
        "  map identity.\n".to_string()
    } else {
        format!(
            "  map {}.\n",
            map.iter()
                .map(|(a, b)| format!("{}->{}", a, b))
                .collect::<Vec<_>>()
                .join(", ")
        )
    };
    format!(
        "chardb {} {{\n  db {}.\n  base {}.\n{}}}\n",
        name, db_name, base_name, map_line
    )
}
