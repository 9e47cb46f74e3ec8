//! Named registries loaded from workspace files, with reference
//! resolution.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use omq_core::chase::{Omq, Ontology};
use omq_core::cover::{CharDbSpec, QiStatus};
use omq_core::query::Ucq;
use omq_core::relstruct::{Constant, Homomorphism, Structure};
use omq_core::textio::{parse_file, ParseError, QiTag};
use omq_core::width::TreeDecomposition;

#[derive(Debug)]
pub enum WorkspaceError {
    Io { path: PathBuf, err: std::io::Error },
    Parse(ParseError),
    Duplicate { kind: &'static str, name: String },
    Dangling { kind: &'static str, name: String, within: String },
    Invalid { name: String, reason: String },
}

impl fmt::Display for WorkspaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkspaceError::Io { path, err } => write!(f, "{}: {}", path.display(), err),
            WorkspaceError::Parse(e) => write!(f, "{}", e),
            WorkspaceError::Duplicate { kind, name } => {
                write!(f, "duplicate {} named '{}'", kind, name)
            }
            WorkspaceError::Dangling { kind, name, within } => {
                write!(f, "'{}' references unknown {} '{}'", within, kind, name)
            }
            WorkspaceError::Invalid { name, reason } => write!(f, "'{}': {}", name, reason),
        }
    }
}

impl std::error::Error for WorkspaceError {}

impl From<ParseError> for WorkspaceError {
    fn from(e: ParseError) -> WorkspaceError {
        WorkspaceError::Parse(e)
    }
}

/// All named objects of a loaded workspace; cross-references resolved.
#[derive(Default)]
pub struct Workspace {
    pub structures: BTreeMap<String, Structure>,
    pub ontologies: BTreeMap<String, Ontology>,
    pub queries: BTreeMap<String, Ucq>,
    pub omqs: BTreeMap<String, Omq>,
    pub chardbs: BTreeMap<String, CharDbSpec>,
    pub treedecs: BTreeMap<String, TreeDecomposition>,
}

fn insert_unique<T>(
    map: &mut BTreeMap<String, T>,
    kind: &'static str,
    name: String,
    value: T,
) -> Result<(), WorkspaceError> {
    if map.contains_key(&name) {
        return Err(WorkspaceError::Duplicate { kind, name });
    }
    map.insert(name, value);
    Ok(())
}

impl Workspace {
    pub fn load(paths: &[PathBuf]) -> Result<Workspace, WorkspaceError> {
        let mut ws = Workspace::default();
        let mut pending_omqs = Vec::new();
        let mut pending_chardbs = Vec::new();
        for path in paths {
            let text = std::fs::read_to_string(path).map_err(|err| WorkspaceError::Io {
                path: path.clone(),
                err,
            })?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| path.display().to_string());
            let parsed = parse_file(&label, &text)?;
            for (name, s) in parsed.structures {
                insert_unique(&mut ws.structures, "structure", name, s)?;
            }
            for (name, o) in parsed.ontologies {
                insert_unique(&mut ws.ontologies, "ontology", name, o)?;
            }
            for (name, q) in parsed.queries {
                insert_unique(&mut ws.queries, "query", name, q)?;
            }
            for (name, td) in parsed.treedecs {
                insert_unique(&mut ws.treedecs, "treedec", name, td)?;
            }
            pending_omqs.extend(parsed.omqs);
            pending_chardbs.extend(parsed.chardbs);
        }
        for (name, po) in pending_omqs {
            let ontology = ws
                .ontologies
                .get(&po.ontology_ref)
                .ok_or_else(|| WorkspaceError::Dangling {
                    kind: "ontology",
                    name: po.ontology_ref.clone(),
                    within: name.clone(),
                })?
                .clone();
            let query = ws
                .queries
                .get(&po.query_ref)
                .ok_or_else(|| WorkspaceError::Dangling {
                    kind: "query",
                    name: po.query_ref.clone(),
                    within: name.clone(),
                })?
                .clone();
            let omq = Omq::new(ontology, po.schema, query).map_err(|e| {
                WorkspaceError::Invalid {
                    name: name.clone(),
                    reason: e.to_string(),
                }
            })?;
            insert_unique(&mut ws.omqs, "omq", name, omq)?;
        }
        for (name, pc) in pending_chardbs {
            let db = ws
                .structures
                .get(&pc.db_ref)
                .ok_or_else(|| WorkspaceError::Dangling {
                    kind: "structure",
                    name: pc.db_ref.clone(),
                    within: name.clone(),
                })?
                .clone();
            let base = ws
                .structures
                .get(&pc.base_ref)
                .ok_or_else(|| WorkspaceError::Dangling {
                    kind: "structure",
                    name: pc.base_ref.clone(),
                    within: name.clone(),
                })?
                .clone();
            let up = if pc.map.is_empty() {
                Homomorphism::identity(&db)
            } else {
                let db_domain = db.domain();
                let base_domain = base.domain();
                let mut map = BTreeMap::new();
                for (from, to) in &pc.map {
                    let from_c = db_domain
                        .iter()
                        .find(|c| c.name.as_str() == from)
                        .cloned()
                        .ok_or_else(|| WorkspaceError::Dangling {
                            kind: "constant",
                            name: from.clone(),
                            within: name.clone(),
                        })?;
                    let to_c = base_domain
                        .iter()
                        .find(|c| c.name.as_str() == to)
                        .cloned()
                        .ok_or_else(|| WorkspaceError::Dangling {
                            kind: "constant",
                            name: to.clone(),
                            within: name.clone(),
                        })?;
                    map.insert(from_c, to_c);
                }
                Homomorphism::new(map)
            };
            let qi = match pc.qi {
                QiTag::WithinBound(n) => QiStatus::WithinBound(n),
                QiTag::NotQi => QiStatus::NotQi,
                QiTag::Unknown => QiStatus::Unknown,
            };
            let spec = CharDbSpec {
                db,
                up,
                base,
                qi,
                mdiv_checked: pc.mdiv_checked,
            };
            insert_unique(&mut ws.chardbs, "chardb", name, spec)?;
        }
        Ok(ws)
    }

    pub fn structure(&self, name: &str) -> Result<&Structure, WorkspaceError> {
        self.structures
            .get(name)
            .ok_or_else(|| WorkspaceError::Dangling {
                kind: "structure",
                name: name.to_string(),
                within: "command line".to_string(),
            })
    }

    pub fn omq(&self, name: &str) -> Result<&Omq, WorkspaceError> {
        self.omqs.get(name).ok_or_else(|| WorkspaceError::Dangling {
            kind: "omq",
            name: name.to_string(),
            within: "command line".to_string(),
        })
    }

    pub fn ontology(&self, name: &str) -> Result<&Ontology, WorkspaceError> {
        self.ontologies
            .get(name)
            .ok_or_else(|| WorkspaceError::Dangling {
                kind: "ontology",
                name: name.to_string(),
                within: "command line".to_string(),
            })
    }

    pub fn query(&self, name: &str) -> Result<&Ucq, WorkspaceError> {
        self.queries
            .get(name)
            .ok_or_else(|| WorkspaceError::Dangling {
                kind: "query",
                name: name.to_string(),
                within: "command line".to_string(),
            })
    }

    pub fn chardb(&self, name: &str) -> Result<&CharDbSpec, WorkspaceError> {
        self.chardbs
            .get(name)
            .ok_or_else(|| WorkspaceError::Dangling {
                kind: "chardb",
                name: name.to_string(),
                within: "command line".to_string(),
            })
    }

    pub fn treedec(&self, name: &str) -> Result<&TreeDecomposition, WorkspaceError> {
        self.treedecs
            .get(name)
            .ok_or_else(|| WorkspaceError::Dangling {
                kind: "treedec",
                name: name.to_string(),
                within: "command line".to_string(),
            })
    }

    /// Parse a comma-separated list of constant names against a
    /// structure's domain.
    pub fn constants_of(
        &self,
        db: &Structure,
        list: &str,
    ) -> Result<Vec<Constant>, WorkspaceError> {
        let domain = db.domain();
        list.split(',')
            .map(|raw| {
                let raw = raw.trim();
                domain
                    .iter()
                    .find(|c| c.name.as_str() == raw)
                    .cloned()
                    .ok_or_else(|| WorkspaceError::Dangling {
                        kind: "constant",
                        name: raw.to_string(),
                        within: "command line".to_string(),
                    })
            })
            .collect()
    }
}

/// Load a workspace directly from labeled text buffers (used by tests).
pub fn load_from_strings(files: &[(&str, &str)]) -> Result<Workspace, WorkspaceError> {
    let dir = std::env::temp_dir().join(format!("omq-ws-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|err| WorkspaceError::Io {
        path: dir.clone(),
        err,
    })?;
    let mut paths = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|err| WorkspaceError::Io {
            path: p.clone(),
            err,
        })?;
        paths.push(p);
    }
    let ws = Workspace::load(&paths);
    let _ = std::fs::remove_dir_all(&dir);
    ws
}

/// Convenience for commands that only need one anonymous structure file.
pub fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string())
}
