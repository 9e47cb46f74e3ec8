//! Hypergraphs, tree decompositions, exact bag-size treewidth, `f`-width
//! under submodular cost functions, and submodular-width brackets.
//!
//! Widths follow the bag-size convention: the width of a decomposition is
//! the maximum bag cardinality, with no `-1`. Classical treewidth is this
//! value minus one.
//!
//! Exact search enumerates vertex elimination orderings with memoized
//! dynamic programming over subsets. For any monotone bag cost this attains
//! the optimum over all tree decompositions: every decomposition induces an
//! elimination ordering whose elimination cliques are contained in its bags,
//! and every ordering's elimination cliques form a decomposition.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::chase::Omq;
use crate::query::{Cq, Ucq};
use crate::ratio::Ratio;
use crate::relstruct::{Structure, Sym};

/// Vertices at or below this count get exact bag-size search.
pub const EXACT_BAG_SIZE_MAX: usize = 14;
/// Vertices at or below this count get exact search under a table-valued
/// cost oracle.
pub const EXACT_ORACLE_MAX: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WidthError {
    EmptyEdge,
    LooseEdge { vertex: Sym },
    TooLarge { vertices: usize, limit: usize },
    GroundSetMismatch,
    CostNotDefined { set: Vec<Sym> },
    CostInvalid { reason: String },
    UncoverableVertex { vertex: Sym },
}

impl fmt::Display for WidthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WidthError::EmptyEdge => write!(f, "hypergraph edges must be nonempty"),
            WidthError::LooseEdge { vertex } => {
                write!(f, "edge mentions vertex {} outside the vertex set", vertex)
            }
            WidthError::TooLarge { vertices, limit } => {
                write!(f, "{} vertices exceed the exact-search limit {}", vertices, limit)
            }
            WidthError::GroundSetMismatch => {
                write!(f, "cost function ground set differs from the vertex set")
            }
            WidthError::CostNotDefined { set } => {
                write!(f, "cost table has no entry for {:?}", set)
            }
            WidthError::CostInvalid { reason } => write!(f, "cost function invalid: {}", reason),
            WidthError::UncoverableVertex { vertex } => {
                write!(f, "vertex {} lies in no edge, so edge covers cannot reach it", vertex)
            }
        }
    }
}

impl std::error::Error for WidthError {}

/// A finite hypergraph; edges are nonempty vertex subsets.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: BTreeSet<Sym>,
    edges: BTreeSet<BTreeSet<Sym>>,
}

impl Hypergraph {
    pub fn new(
        vertices: BTreeSet<Sym>,
        edges: BTreeSet<BTreeSet<Sym>>,
    ) -> Result<Hypergraph, WidthError> {
        for e in &edges {
            if e.is_empty() {
                return Err(WidthError::EmptyEdge);
            }
            for v in e {
                if !vertices.contains(v) {
                    return Err(WidthError::LooseEdge { vertex: v.clone() });
                }
            }
        }
        Ok(Hypergraph { vertices, edges })
    }

    pub fn vertices(&self) -> &BTreeSet<Sym> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<BTreeSet<Sym>> {
        &self.edges
    }

    /// The `i`-clique as a 2-uniform hypergraph on `x1..xi`.
    pub fn clique(i: usize) -> Hypergraph {
        let names: Vec<Sym> = (1..=i).map(|k| Sym::from(format!("x{}", k))).collect();
        let mut edges = BTreeSet::new();
        for a in 0..i {
            for b in (a + 1)..i {
                edges.insert([names[a].clone(), names[b].clone()].into_iter().collect());
            }
        }
        Hypergraph {
            vertices: names.into_iter().collect(),
            edges,
        }
    }
}

impl fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H(V={:?}, E={:?})", self.vertices, self.edges)
    }
}

/// One edge per fact's argument set, duplicates collapsed.
pub fn hypergraph_of_structure(d: &Structure) -> Hypergraph {
    let vertices: BTreeSet<Sym> = d.domain().into_iter().map(|c| c.name).collect();
    let edges: BTreeSet<BTreeSet<Sym>> = d
        .facts()
        .iter()
        .map(|f| f.arg_set().into_iter().map(|c| c.name).collect())
        .collect();
    Hypergraph { vertices, edges }
}

/// One edge per atom's variable set.
pub fn hypergraph_of_cq(q: &Cq) -> Hypergraph {
    hypergraph_of_structure(&q.canonical_db())
}

/// Width measures of a UCQ lift as the maximum over disjunct hypergraphs.
pub fn hypergraphs_of_ucq(q: &Ucq) -> Vec<Hypergraph> {
    q.disjuncts().iter().map(hypergraph_of_cq).collect()
}

pub fn hypergraphs_of_omq(q: &Omq) -> Vec<Hypergraph> {
    hypergraphs_of_ucq(&q.query)
}

/// A rooted tree decomposition: bags plus parent links, with exactly one
/// root.
#[derive(Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<Sym>>,
    pub parent: Vec<Option<usize>>,
}

/// A violated decomposition condition, with a concrete witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    /// Parent links do not form one rooted tree.
    Malformed { reason: String },
    /// A vertex appears in no bag.
    MissingVertex { vertex: Sym },
    /// An edge is contained in no bag.
    UncoveredEdge { edge: BTreeSet<Sym> },
    /// The bags holding a vertex are not connected in the tree.
    DisconnectedVertex { vertex: Sym },
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::Malformed { reason } => write!(f, "malformed tree: {}", reason),
            TdViolation::MissingVertex { vertex } => write!(f, "vertex {} in no bag", vertex),
            TdViolation::UncoveredEdge { edge } => write!(f, "edge {:?} in no bag", edge),
            TdViolation::DisconnectedVertex { vertex } => {
                write!(f, "bags holding {} are disconnected", vertex)
            }
        }
    }
}

impl TreeDecomposition {
    /// Single-node decomposition holding the whole vertex set.
    pub fn single_bag(vertices: BTreeSet<Sym>) -> TreeDecomposition {
        TreeDecomposition {
            bags: vec![vertices],
            parent: vec![None],
        }
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(|p| p.is_none())
    }

    /// Check the three decomposition conditions against `h`, reporting every
    /// violation with a witness.
    pub fn validate(&self, h: &Hypergraph) -> Vec<TdViolation> {
        let mut out = Vec::new();
        if self.bags.len() != self.parent.len() {
            out.push(TdViolation::Malformed {
                reason: "bag and parent counts differ".into(),
            });
            return out;
        }
        let roots = self.parent.iter().filter(|p| p.is_none()).count();
        if self.bags.is_empty() || roots != 1 {
            out.push(TdViolation::Malformed {
                reason: format!("{} roots", roots),
            });
            return out;
        }
        // Reachability from the root must cover all nodes (no cycles).
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                if *p >= self.bags.len() {
                    out.push(TdViolation::Malformed {
                        reason: format!("parent index {} out of range", p),
                    });
                    return out;
                }
                children[*p].push(i);
            }
        }
        let root = self.root().unwrap();
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if seen[n] {
                out.push(TdViolation::Malformed {
                    reason: "cycle in parent links".into(),
                });
                return out;
            }
            seen[n] = true;
            stack.extend(children[n].iter().copied());
        }
        if seen.iter().any(|s| !s) {
            out.push(TdViolation::Malformed {
                reason: "unreachable nodes".into(),
            });
            return out;
        }

        for v in &h.vertices {
            if !self.bags.iter().any(|b| b.contains(v)) {
                out.push(TdViolation::MissingVertex { vertex: v.clone() });
            }
        }
        for e in &h.edges {
            if !self.bags.iter().any(|b| e.is_subset(b)) {
                out.push(TdViolation::UncoveredEdge { edge: e.clone() });
            }
        }
        // Connectedness: the nodes holding v must form one component under
        // the parent relation restricted to them.
        for v in &h.vertices {
            let holding: Vec<usize> = (0..self.bags.len())
                .filter(|i| self.bags[*i].contains(v))
                .collect();
            if holding.len() <= 1 {
                continue;
            }
            let mut comp: BTreeSet<usize> = [holding[0]].into_iter().collect();
            let mut grew = true;
            while grew {
                grew = false;
                for &n in &holding {
                    if comp.contains(&n) {
                        continue;
                    }
                    let touches = match self.parent[n] {
                        Some(p) => comp.contains(&p),
                        None => false,
                    } || holding
                        .iter()
                        .any(|&m| comp.contains(&m) && self.parent[m] == Some(n));
                    if touches {
                        comp.insert(n);
                        grew = true;
                    }
                }
            }
            if comp.len() != holding.len() {
                out.push(TdViolation::DisconnectedVertex { vertex: v.clone() });
            }
        }
        out
    }

    pub fn is_valid_for(&self, h: &Hypergraph) -> bool {
        self.validate(h).is_empty()
    }
}

impl fmt::Debug for TreeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, bag) in self.bags.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match self.parent[i] {
                None => write!(f, "[{}:{:?}]", i, bag)?,
                Some(p) => write!(f, "[{}<-{}:{:?}]", i, p, bag)?,
            }
        }
        Ok(())
    }
}

/// How a cost function is evaluated.
#[derive(Clone, Debug)]
pub enum CostEval {
    /// `|X| / 2`; the canonical edge-dominated lower-bound witness on
    /// 2-uniform hypergraphs.
    HalfCardinality,
    /// `|X|`; reproduces bag-size treewidth.
    Cardinality,
    /// Explicit table over all subsets of the ground set.
    Table(BTreeMap<BTreeSet<Sym>, Ratio>),
}

/// A bag-cost function with its ground set.
#[derive(Clone, Debug)]
pub struct SubmodularFn {
    pub ground: BTreeSet<Sym>,
    pub eval: CostEval,
    /// Label used in reports and witnesses.
    pub label: String,
}

impl SubmodularFn {
    pub fn half_cardinality(ground: BTreeSet<Sym>) -> SubmodularFn {
        SubmodularFn {
            ground,
            eval: CostEval::HalfCardinality,
            label: "half-cardinality".into(),
        }
    }

    pub fn cardinality(ground: BTreeSet<Sym>) -> SubmodularFn {
        SubmodularFn {
            ground,
            eval: CostEval::Cardinality,
            label: "cardinality".into(),
        }
    }

    pub fn table(
        ground: BTreeSet<Sym>,
        label: impl Into<String>,
        entries: BTreeMap<BTreeSet<Sym>, Ratio>,
    ) -> SubmodularFn {
        SubmodularFn {
            ground,
            eval: CostEval::Table(entries),
            label: label.into(),
        }
    }

    /// Build a table from a closure over every subset of the ground set.
    pub fn from_fn(
        ground: BTreeSet<Sym>,
        label: impl Into<String>,
        f: impl Fn(&BTreeSet<Sym>) -> Ratio,
    ) -> SubmodularFn {
        let items: Vec<Sym> = ground.iter().cloned().collect();
        let mut entries = BTreeMap::new();
        for mask in 0u64..(1u64 << items.len()) {
            let set: BTreeSet<Sym> = items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect();
            let val = f(&set);
            entries.insert(set, val);
        }
        SubmodularFn::table(ground, label, entries)
    }

    pub fn value(&self, set: &BTreeSet<Sym>) -> Result<Ratio, WidthError> {
        match &self.eval {
            CostEval::HalfCardinality => Ok(Ratio::half(set.len() as i64)),
            CostEval::Cardinality => Ok(Ratio::int(set.len() as i64)),
            CostEval::Table(entries) => entries.get(set).copied().ok_or_else(|| {
                WidthError::CostNotDefined {
                    set: set.iter().cloned().collect(),
                }
            }),
        }
    }

    fn vertex_limit(&self) -> usize {
        match self.eval {
            CostEval::Table(_) => EXACT_ORACLE_MAX,
            _ => EXACT_BAG_SIZE_MAX,
        }
    }
}

/// Exhaustive property check of a cost function against a hypergraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub zero_at_empty: bool,
    pub monotone: bool,
    pub submodular: bool,
    pub edge_dominated: bool,
}

impl CostReport {
    pub fn admissible_lower_bound_witness(&self) -> bool {
        self.zero_at_empty && self.monotone && self.submodular && self.edge_dominated
    }
}

/// Check all four properties of a cost function against a hypergraph; the
/// ground set must equal the vertex set.
///
/// Table-valued costs are checked exhaustively over all subset pairs. The
/// built-in cardinality families are modular, so only edge-domination needs
/// checking for them; this keeps formula costs usable at the bag-size
/// vertex limit.
pub fn validate_cost_function(
    f: &SubmodularFn,
    h: &Hypergraph,
) -> Result<CostReport, WidthError> {
    if f.ground != h.vertices {
        return Err(WidthError::GroundSetMismatch);
    }
    if !matches!(f.eval, CostEval::Table(_)) {
        let mut edge_dominated = true;
        for e in &h.edges {
            if f.value(e)? > Ratio::int(1) {
                edge_dominated = false;
                break;
            }
        }
        return Ok(CostReport {
            zero_at_empty: true,
            monotone: true,
            submodular: true,
            edge_dominated,
        });
    }
    let items: Vec<Sym> = f.ground.iter().cloned().collect();
    let n = items.len();
    if n > EXACT_ORACLE_MAX {
        return Err(WidthError::TooLarge {
            vertices: n,
            limit: EXACT_ORACLE_MAX,
        });
    }
    let set_of = |mask: u64| -> BTreeSet<Sym> {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect()
    };
    let mut values: Vec<Ratio> = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        values.push(f.value(&set_of(mask))?);
    }
    let zero_at_empty = values[0] == Ratio::zero();
    let mut monotone = true;
    'mono: for mask in 0u64..(1u64 << n) {
        for i in 0..n {
            if mask >> i & 1 == 0
                && values[mask as usize] > values[(mask | (1 << i)) as usize] {
                    monotone = false;
                    break 'mono;
                }
        }
    }
    let mut submodular = true;
    'sub: for x in 0u64..(1u64 << n) {
        for y in 0u64..(1u64 << n) {
            let lhs = values[x as usize] + values[y as usize];
            let rhs = values[(x & y) as usize] + values[(x | y) as usize];
            if lhs < rhs {
                submodular = false;
                break 'sub;
            }
        }
    }
    let mut edge_dominated = true;
    for e in &h.edges {
        if f.value(e)? > Ratio::int(1) {
            edge_dominated = false;
            break;
        }
    }
    Ok(CostReport {
        zero_at_empty,
        monotone,
        submodular,
        edge_dominated,
    })
}

/// Indexed view of a hypergraph for subset dynamic programming.
struct Indexed {
    items: Vec<Sym>,
    adj: Vec<u64>, // primal-graph adjacency masks
}

impl Indexed {
    fn new(h: &Hypergraph) -> Indexed {
        let items: Vec<Sym> = h.vertices.iter().cloned().collect();
        let index: BTreeMap<&Sym, usize> = items.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut adj = vec![0u64; items.len()];
        for e in &h.edges {
            let ids: Vec<usize> = e.iter().map(|v| index[v]).collect();
            for &a in &ids {
                for &b in &ids {
                    if a != b {
                        adj[a] |= 1 << b;
                    }
                }
            }
        }
        Indexed { items, adj }
    }

    fn set_of(&self, mask: u64) -> BTreeSet<Sym> {
        self.items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// Elimination clique of `v` among `remaining`: remaining vertices
    /// reachable from `v` through already-eliminated vertices.
    fn elimination_clique(&self, v: usize, remaining: u64) -> u64 {
        let eliminated = !remaining;
        let mut clique = 0u64;
        let mut visited = 1u64 << v;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            let mut nbrs = self.adj[u];
            while nbrs != 0 {
                let w = nbrs.trailing_zeros() as usize;
                nbrs &= nbrs - 1;
                if visited >> w & 1 == 1 {
                    continue;
                }
                visited |= 1 << w;
                if remaining >> w & 1 == 1 {
                    clique |= 1 << w;
                } else if eliminated >> w & 1 == 1 {
                    stack.push(w);
                }
            }
        }
        clique
    }
}

/// Minimize the maximum bag cost over all tree decompositions, via
/// elimination-ordering DP. `cost` must be monotone under set inclusion.
fn min_max_bag_cost(
    h: &Hypergraph,
    cost: &mut dyn FnMut(&BTreeSet<Sym>) -> Result<Ratio, WidthError>,
) -> Result<(Ratio, TreeDecomposition), WidthError> {
    let idx = Indexed::new(h);
    let n = idx.items.len();
    if n == 0 {
        let td = TreeDecomposition::single_bag(BTreeSet::new());
        return Ok((Ratio::zero(), td));
    }
    let full: u64 = if n == 64 { !0 } else { (1 << n) - 1 };
    let mut memo: HashMap<u64, (Ratio, usize)> = HashMap::new();
    let mut bag_cost: HashMap<(usize, u64), Ratio> = HashMap::new();

    fn solve(
        remaining: u64,
        idx: &Indexed,
        memo: &mut HashMap<u64, (Ratio, usize)>,
        bag_cost: &mut HashMap<(usize, u64), Ratio>,
        cost: &mut dyn FnMut(&BTreeSet<Sym>) -> Result<Ratio, WidthError>,
    ) -> Result<Ratio, WidthError> {
        if remaining == 0 {
            return Ok(Ratio::zero());
        }
        if let Some((r, _)) = memo.get(&remaining) {
            return Ok(*r);
        }
        let mut best: Option<(Ratio, usize)> = None;
        let mut rest = remaining;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let clique = idx.elimination_clique(v, remaining & !(1 << v));
            let bag = clique | (1 << v);
            let c = match bag_cost.get(&(v, bag)) {
                Some(c) => *c,
                None => {
                    let c = cost(&idx.set_of(bag))?;
                    bag_cost.insert((v, bag), c);
                    c
                }
            };
            let sub = solve(remaining & !(1 << v), idx, memo, bag_cost, cost)?;
            let total = c.max(sub);
            if best.is_none_or(|(b, _)| total < b) {
                best = Some((total, v));
            }
        }
        let (r, v) = best.expect("nonempty remaining set");
        memo.insert(remaining, (r, v));
        Ok(r)
    }

    let width = solve(full, &idx, &mut memo, &mut bag_cost, cost)?;

    // Reconstruct the elimination ordering from the memo, lexicographically
    // least among optimal choices by construction.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut remaining = full;
    while remaining != 0 {
        let v = memo[&remaining].1;
        order.push(v);
        remaining &= !(1 << v);
    }

    // Bags are elimination cliques; each bag attaches to the bag of the
    // earliest-eliminated vertex of its clique.
    let mut bags: Vec<BTreeSet<Sym>> = Vec::with_capacity(n);
    let mut cliques: Vec<u64> = Vec::with_capacity(n);
    let mut pos = vec![0usize; n];
    let mut rem = full;
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
        rem &= !(1 << v);
        let clique = idx.elimination_clique(v, rem);
        cliques.push(clique);
        bags.push(idx.set_of(clique | (1 << v)));
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut first_root: Option<usize> = None;
    for i in 0..n {
        let clique = cliques[i];
        if clique == 0 {
            // Isolated remainder: chain component roots under one root.
            match first_root {
                None => first_root = Some(i),
                Some(r) => parent[i] = Some(r),
            }
        } else {
            // Earliest (in elimination order) member of the clique.
            let next = (0..64)
                .filter(|b| clique >> b & 1 == 1)
                .min_by_key(|b| pos[*b as usize])
                .unwrap();
            parent[i] = Some(pos[next as usize]);
        }
    }
    // If no node ended up a root (cannot happen: the last-eliminated vertex
    // has an empty clique), fall back defensively.
    let td = TreeDecomposition { bags, parent };
    Ok((width, td))
}

/// Exact treewidth under the bag-size convention, with a witnessing
/// decomposition.
pub fn treewidth_exact(h: &Hypergraph) -> Result<(usize, TreeDecomposition), WidthError> {
    let n = h.vertices.len();
    if n > EXACT_BAG_SIZE_MAX {
        return Err(WidthError::TooLarge {
            vertices: n,
            limit: EXACT_BAG_SIZE_MAX,
        });
    }
    let (w, td) = min_max_bag_cost(h, &mut |bag| Ok(Ratio::int(bag.len() as i64)))?;
    debug_assert!(td.is_valid_for(h));
    Ok((w.numer() as usize, td))
}

/// Exact `f`-width: the minimum over tree decompositions of the maximum bag
/// cost. The cost function must be monotone, submodular, and zero on the
/// empty set (edge-domination is not required here).
pub fn f_width(h: &Hypergraph, f: &SubmodularFn) -> Result<(Ratio, TreeDecomposition), WidthError> {
    let n = h.vertices.len();
    let limit = f.vertex_limit();
    if n > limit {
        return Err(WidthError::TooLarge { vertices: n, limit });
    }
    let report = validate_cost_function(f, h)?;
    if !report.zero_at_empty || !report.monotone || !report.submodular {
        return Err(WidthError::CostInvalid {
            reason: format!(
                "zero_at_empty={} monotone={} submodular={}",
                report.zero_at_empty, report.monotone, report.submodular
            ),
        });
    }
    let (w, td) = min_max_bag_cost(h, &mut |bag| f.value(bag))?;
    debug_assert!(td.is_valid_for(h));
    Ok((w, td))
}

/// Minimum number of edges whose union covers `bag` (branch and bound).
fn edge_cover_number(
    bag: &BTreeSet<Sym>,
    edges: &[BTreeSet<Sym>],
) -> Result<usize, WidthError> {
    fn go(
        uncovered: &BTreeSet<Sym>,
        edges: &[BTreeSet<Sym>],
        used: usize,
        best: &mut usize,
    ) {
        if uncovered.is_empty() {
            *best = (*best).min(used);
            return;
        }
        if used + 1 >= *best {
            return;
        }
        let pivot = uncovered.iter().next().unwrap();
        for e in edges.iter().filter(|e| e.contains(pivot)) {
            let rest: BTreeSet<Sym> = uncovered.difference(e).cloned().collect();
            go(&rest, edges, used + 1, best);
        }
    }
    if bag.is_empty() {
        return Ok(0);
    }
    for v in bag {
        if !edges.iter().any(|e| e.contains(v)) {
            return Err(WidthError::UncoverableVertex { vertex: v.clone() });
        }
    }
    let mut best = bag.len() + 1;
    go(bag, edges, 0, &mut best);
    Ok(best)
}

/// A two-sided submodular-width estimate: the lower bound is the best
/// `f`-width over the validated, edge-dominated candidates; the upper bound
/// is the integral edge-cover width, which dominates every edge-dominated
/// monotone subadditive cost.
#[derive(Clone, Debug)]
pub struct WidthBracket {
    pub lower: Ratio,
    /// Label of the candidate attaining the lower bound, if any.
    pub lower_witness: Option<String>,
    pub upper: Ratio,
    pub upper_witness: TreeDecomposition,
    pub method: &'static str,
    /// Candidates that failed validation, with their labels.
    pub rejected: Vec<String>,
}

pub fn smw_bracket(
    h: &Hypergraph,
    candidates: &[SubmodularFn],
) -> Result<WidthBracket, WidthError> {
    let mut lower = Ratio::zero();
    let mut lower_witness = None;
    let mut rejected = Vec::new();
    for f in candidates {
        let report = validate_cost_function(f, h)?;
        if !report.admissible_lower_bound_witness() {
            rejected.push(f.label.clone());
            continue;
        }
        let (w, _) = f_width(h, f)?;
        if w > lower {
            lower = w;
            lower_witness = Some(f.label.clone());
        }
    }
    let edges: Vec<BTreeSet<Sym>> = h.edges.iter().cloned().collect();
    let n = h.vertices.len();
    if n > EXACT_BAG_SIZE_MAX {
        return Err(WidthError::TooLarge {
            vertices: n,
            limit: EXACT_BAG_SIZE_MAX,
        });
    }
    let (upper, td) = min_max_bag_cost(h, &mut |bag| {
        edge_cover_number(bag, &edges).map(|k| Ratio::int(k as i64))
    })?;
    assert!(
        lower <= upper,
        "bracket soundness: lower {} exceeds upper {}",
        lower,
        upper
    );
    Ok(WidthBracket {
        lower,
        lower_witness,
        upper,
        upper_witness: td,
        method: "integral-edge-cover",
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn syms(names: &[&str]) -> BTreeSet<Sym> {
        names.iter().map(|n| Sym::from(*n)).collect()
    }

    #[test]
    fn hypergraph_of_structures() {
        let d = fixtures::structure(&[("R", &["a", "b"])]);
        let h = hypergraph_of_structure(&d);
        assert_eq!(h.vertices(), &syms(&["a", "b"]));
        assert_eq!(h.edges().len(), 1);

        let loopy = fixtures::structure(&[("R", &["a", "a"])]);
        let h = hypergraph_of_structure(&loopy);
        assert_eq!(h.vertices(), &syms(&["a"]));
        assert_eq!(h.edges().iter().next().unwrap(), &syms(&["a"]));
    }

    #[test]
    fn clique_query_hypergraph_is_clique() {
        let ex = fixtures::clique_example(4);
        let h = hypergraph_of_cq(ex.omq.query.disjuncts().first().unwrap());
        assert_eq!(h.vertices().len(), 4);
        assert_eq!(h.edges().len(), 6);
        assert!(h.edges().iter().all(|e| e.len() == 2));
    }

    #[test]
    fn validate_path_decomposition() {
        let h = Hypergraph::new(
            syms(&["a", "b", "c"]),
            [syms(&["a", "b"]), syms(&["b", "c"])].into_iter().collect(),
        )
        .unwrap();
        let good = TreeDecomposition {
            bags: vec![syms(&["a", "b"]), syms(&["b", "c"])],
            parent: vec![None, Some(0)],
        };
        assert!(good.is_valid_for(&h));

        let bad = TreeDecomposition {
            bags: vec![syms(&["a", "b"]), syms(&["c"])],
            parent: vec![None, Some(0)],
        };
        let violations = bad.validate(&h);
        assert!(violations
            .iter()
            .any(|v| matches!(v, TdViolation::UncoveredEdge { .. })));
    }

    #[test]
    fn disconnected_vertex_detected() {
        let h = Hypergraph::new(
            syms(&["a", "b", "c"]),
            [syms(&["a", "b"]), syms(&["b", "c"])].into_iter().collect(),
        )
        .unwrap();
        let td = TreeDecomposition {
            bags: vec![syms(&["a", "b"]), syms(&["c", "a"]), syms(&["b", "c"])],
            parent: vec![None, Some(0), Some(1)],
        };
        let violations = td.validate(&h);
        assert!(violations
            .iter()
            .any(|v| matches!(v, TdViolation::DisconnectedVertex { vertex } if vertex.as_str() == "b")));
    }

    #[test]
    fn treewidth_of_cliques_and_cycles() {
        assert_eq!(treewidth_exact(&Hypergraph::clique(4)).unwrap().0, 4);
        let edge = Hypergraph::new(
            syms(&["a", "b"]),
            [syms(&["a", "b"])].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(treewidth_exact(&edge).unwrap().0, 2);
        // 6-cycle: bag-size treewidth 3.
        let names: Vec<String> = (0..6).map(|i| format!("c{}", i)).collect();
        let mut edges = BTreeSet::new();
        for i in 0..6 {
            edges.insert(syms(&[&names[i], &names[(i + 1) % 6]]));
        }
        let cycle = Hypergraph::new(
            names.iter().map(|n| Sym::from(n.as_str())).collect(),
            edges,
        )
        .unwrap();
        let (w, td) = treewidth_exact(&cycle).unwrap();
        assert_eq!(w, 3);
        assert!(td.is_valid_for(&cycle));
    }

    #[test]
    fn f_width_of_cliques() {
        for i in [2usize, 3, 4] {
            let h = Hypergraph::clique(i);
            let f = SubmodularFn::half_cardinality(h.vertices().clone());
            let (w, td) = f_width(&h, &f).unwrap();
            assert_eq!(w, Ratio::half(i as i64));
            assert!(td.is_valid_for(&h));
        }
    }

    #[test]
    fn f_width_zero_cost() {
        let h = Hypergraph::clique(3);
        let f = SubmodularFn::from_fn(h.vertices().clone(), "zero", |_| Ratio::zero());
        assert_eq!(f_width(&h, &f).unwrap().0, Ratio::zero());
    }

    #[test]
    fn f_width_cardinality_matches_treewidth() {
        for h in [Hypergraph::clique(4), {
            let ex = fixtures::clique_example(3);
            hypergraph_of_cq(&ex.guarded_cq)
        }] {
            let f = SubmodularFn::cardinality(h.vertices().clone());
            let (w, _) = f_width(&h, &f).unwrap();
            let (tw, _) = treewidth_exact(&h).unwrap();
            assert_eq!(w, Ratio::int(tw as i64));
        }
    }

    #[test]
    fn f_width_rejects_invalid_costs() {
        let h = Hypergraph::clique(3);
        let square = SubmodularFn::from_fn(h.vertices().clone(), "square", |s| {
            Ratio::int((s.len() * s.len()) as i64)
        });
        assert!(matches!(
            f_width(&h, &square),
            Err(WidthError::CostInvalid { .. })
        ));
    }

    #[test]
    fn cost_validation_examples() {
        let h = Hypergraph::clique(4);
        let half = SubmodularFn::half_cardinality(h.vertices().clone());
        let report = validate_cost_function(&half, &h).unwrap();
        assert!(report.admissible_lower_bound_witness());

        let square = SubmodularFn::from_fn(h.vertices().clone(), "square", |s| {
            Ratio::int((s.len() * s.len()) as i64)
        });
        let report = validate_cost_function(&square, &h).unwrap();
        assert!(!report.submodular);

        let card = SubmodularFn::cardinality(h.vertices().clone());
        let report = validate_cost_function(&card, &h).unwrap();
        assert!(report.monotone && report.submodular);
        assert!(!report.edge_dominated);

        let mismatched = SubmodularFn::half_cardinality(syms(&["z"]));
        assert!(matches!(
            validate_cost_function(&mismatched, &h),
            Err(WidthError::GroundSetMismatch)
        ));
    }

    #[test]
    fn bracket_on_cliques_and_guarded_variant() {
        let h = Hypergraph::clique(4);
        let half = SubmodularFn::half_cardinality(h.vertices().clone());
        let b = smw_bracket(&h, &[half]).unwrap();
        assert_eq!(b.lower, Ratio::int(2));
        assert_eq!(b.upper, Ratio::int(2));
        assert_eq!(b.lower_witness.as_deref(), Some("half-cardinality"));

        // Adding a full guard edge drops the upper bound to 1.
        let ex = fixtures::clique_example(4);
        let hq = hypergraph_of_cq(&ex.guarded_cq);
        let half = SubmodularFn::half_cardinality(hq.vertices().clone());
        let b = smw_bracket(&hq, &[half]).unwrap();
        assert!(b.upper <= Ratio::int(1));
        // Half-cardinality is no longer edge-dominated there.
        assert_eq!(b.rejected, vec!["half-cardinality".to_string()]);

        let edge = Hypergraph::new(
            syms(&["a", "b"]),
            [syms(&["a", "b"])].into_iter().collect(),
        )
        .unwrap();
        let b = smw_bracket(&edge, &[]).unwrap();
        assert_eq!(b.lower, Ratio::zero());
        assert_eq!(b.upper, Ratio::int(1));
    }

    #[test]
    fn exact_search_refuses_oversized_inputs() {
        let h = Hypergraph::clique(EXACT_BAG_SIZE_MAX + 1);
        assert!(matches!(
            treewidth_exact(&h),
            Err(WidthError::TooLarge { .. })
        ));
        let names: BTreeSet<Sym> = (0..EXACT_ORACLE_MAX + 1)
            .map(|i| Sym::from(format!("v{}", i)))
            .collect();
        let table = SubmodularFn::from_fn(names.clone(), "zero", |_| Ratio::zero());
        let mut edges = BTreeSet::new();
        edges.insert(names.clone());
        let big = Hypergraph::new(names, edges).unwrap();
        assert!(matches!(f_width(&big, &table), Err(WidthError::TooLarge { .. })));
    }

    #[test]
    fn dp_matches_factorial_enumeration_on_small_graphs() {
        // Independent check of the subset DP against brute force over all
        // elimination orderings, for bag-size cost.
        let graphs = vec![
            Hypergraph::clique(4),
            {
                let names: Vec<String> = (0..6).map(|i| format!("c{}", i)).collect();
                let mut edges = BTreeSet::new();
                for i in 0..6 {
                    edges.insert(syms(&[&names[i], &names[(i + 1) % 6]]));
                }
                Hypergraph::new(
                    names.iter().map(|n| Sym::from(n.as_str())).collect(),
                    edges,
                )
                .unwrap()
            },
            {
                // Two triangles sharing a vertex.
                let mut edges = BTreeSet::new();
                for pair in [
                    ["a", "b"], ["b", "c"], ["a", "c"],
                    ["c", "d"], ["d", "e"], ["c", "e"],
                ] {
                    edges.insert(syms(&pair));
                }
                Hypergraph::new(syms(&["a", "b", "c", "d", "e"]), edges).unwrap()
            },
        ];
        for h in graphs {
            let (dp, _) = treewidth_exact(&h).unwrap();
            let brute = brute_force_treewidth(&h);
            assert_eq!(dp, brute);
        }
    }

    fn brute_force_treewidth(h: &Hypergraph) -> usize {
        let idx = Indexed::new(h);
        let n = idx.items.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = usize::MAX;
        permute(&mut order, 0, &mut |ord| {
            let mut remaining: u64 = (1 << n) - 1;
            let mut worst = 0usize;
            for &v in ord {
                remaining &= !(1 << v);
                let clique = idx.elimination_clique(v, remaining);
                worst = worst.max(clique.count_ones() as usize + 1);
            }
            best = best.min(worst);
        });
        best
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }
}
