//! Weighted dependency graph of a polynomial vector field, its strong
//! components, the acyclic skeleton (condensation) and the depth layering of
//! the skeleton.
//!
//! The edge `i -> j` carries `df_j/dx_i`: it says that `x_i` drives `x_j`.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::poly::{Polynomial, VariableSpace};
use crate::sysparse::PolySystem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    NotAnEdge { from: usize, to: usize },
    NodeOutOfRange { node: usize, n: usize },
    TooManyNodes { n: usize, max: usize },
    CondensationCycle,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::NotAnEdge { from, to } => write!(f, "walk uses non-edge {} -> {}", from + 1, to + 1),
            GraphError::NodeOutOfRange { node, n } => write!(f, "node {node} out of range for {n} nodes"),
            GraphError::TooManyNodes { n, max } => {
                write!(f, "cycle enumeration limited to {max} nodes, graph has {n}")
            }
            GraphError::CondensationCycle => f.write_str("internal error: condensation has a cycle"),
        }
    }
}

impl core::error::Error for GraphError {}

/// Weighted dependency graph. Only nonzero weights are stored.
#[derive(Clone, Debug)]
pub struct Wdg {
    space: VariableSpace,
    weights: BTreeMap<(usize, usize), Polynomial>,
    succ: Vec<Vec<usize>>,
}

impl Wdg {
    /// Builds a graph from arbitrary weights over `space`; zero weights are
    /// dropped. Node count is the size of `space`.
    pub fn from_weights<I>(space: &VariableSpace, weights: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = ((usize, usize), Polynomial)>,
    {
        let n = space.len();
        let mut map = BTreeMap::new();
        for ((i, j), w) in weights {
            for node in [i, j] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if !w.is_zero() {
                map.insert((i, j), w);
            }
        }
        let mut succ = vec![Vec::new(); n];
        for &(i, j) in map.keys() {
            succ[i].push(j);
        }
        Ok(Self {
            space: space.clone(),
            weights: map,
            succ,
        })
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &VariableSpace {
        &self.space
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<&Polynomial> {
        self.weights.get(&(from, to))
    }

    /// Edges `(from, to, weight)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Polynomial)> {
        self.weights.iter().map(|(&(i, j), w)| (i, j, w))
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }
}

/// Edge `i -> j` with weight `df_j/dx_i` for every nonzero partial derivative.
pub fn build_wdg(sys: &PolySystem) -> Wdg {
    let n = sys.dim();
    let mut weights = Vec::new();
    for (j, fj) in sys.rhs().iter().enumerate() {
        for i in fj.variables() {
            let w = fj.differentiate(i).expect("index from the same space");
            weights.push(((i, j), w));
        }
    }
    debug_assert!(weights.iter().all(|((i, j), _)| *i < n && *j < n));
    Wdg::from_weights(sys.vars(), weights).expect("indices in range")
}

/// Strong components in topological order of the condensation (sources
/// first). Among components that are simultaneously ready, the one holding
/// the smallest node index comes first. Members are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccDecomposition {
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

impl SccDecomposition {
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The projection `v -> u`.
    pub fn component_of(&self, node: usize) -> usize {
        self.component_of[node]
    }
}

struct Tarjan<'a> {
    g: &'a Wdg,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    comps: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next);
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for &w in self.g.successors(v) {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("v is on the stack");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}

pub fn scc_decomposition(g: &Wdg) -> SccDecomposition {
    let n = g.n();
    let mut t = Tarjan {
        g,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        comps: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut raw = t.comps;
    for c in &mut raw {
        c.sort_unstable();
    }
    let mut raw_of = vec![0; n];
    for (k, c) in raw.iter().enumerate() {
        for &v in c {
            raw_of[v] = k;
        }
    }

    // Kahn over the condensation, keyed by smallest member.
    let q = raw.len();
    let mut indeg = vec![0usize; q];
    let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); q];
    for (i, j, _) in g.edges() {
        let (a, b) = (raw_of[i], raw_of[j]);
        if a != b && out[a].insert(b) {
            indeg[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..q)
        .filter(|&k| indeg[k] == 0)
        .map(|k| Reverse((raw[k][0], k)))
        .collect();
    let mut order = Vec::with_capacity(q);
    while let Some(Reverse((_, k))) = ready.pop() {
        order.push(k);
        for &b in &out[k] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(Reverse((raw[b][0], b)));
            }
        }
    }
    debug_assert_eq!(order.len(), q, "condensation of SCCs is acyclic");

    let components: Vec<Vec<usize>> = order.iter().map(|&k| raw[k].clone()).collect();
    let mut component_of = vec![0; n];
    for (k, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = k;
        }
    }
    SccDecomposition {
        components,
        component_of,
    }
}

/// Condensation of the graph with its depth layering. Node `k` stands for
/// component `k` of the decomposition it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonGraph {
    edges: BTreeSet<(usize, usize)>,
    members: Vec<Vec<usize>>,
    projection: Vec<usize>,
    depth: Vec<usize>,
    layers: Vec<Vec<usize>>,
}

impl SkeletonGraph {
    pub fn num_nodes(&self) -> usize {
        self.members.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    /// Graph nodes represented by skeleton node `u`.
    pub fn members(&self, u: usize) -> &[usize] {
        &self.members[u]
    }

    pub fn project(&self, v: usize) -> usize {
        self.projection[v]
    }

    pub fn depth(&self, u: usize) -> usize {
        self.depth[u]
    }

    /// `U_0 ... U_l`, each sorted.
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    /// Length of the longest path, `l`.
    pub fn max_depth(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }
}

pub fn build_skeleton(g: &Wdg, d: &SccDecomposition) -> Result<SkeletonGraph, GraphError> {
    let q = d.len();
    let mut edges = BTreeSet::new();
    for (i, j, _) in g.edges() {
        let (a, b) = (d.component_of(i), d.component_of(j));
        if a == b {
            continue;
        }
        // components are in topological order, so every edge points forward
        if a > b {
            return Err(GraphError::CondensationCycle);
        }
        edges.insert((a, b));
    }
    let mut depth = vec![0usize; q];
    for &(a, b) in &edges {
        // edges sorted by source; sources precede targets topologically
        depth[b] = depth[b].max(depth[a] + 1);
    }
    let max_depth = depth.iter().copied().max();
    let mut layers = vec![Vec::new(); max_depth.map_or(0, |m| m + 1)];
    for (u, &k) in depth.iter().enumerate() {
        layers[k].push(u);
    }
    Ok(SkeletonGraph {
        edges,
        members: d.components().to_vec(),
        projection: (0..g.n()).map(|v| d.component_of(v)).collect(),
        depth,
        layers,
    })
}

/// Product of the edge weights along `walk`. A single node gives `1`.
pub fn walk_weight(g: &Wdg, walk: &[usize]) -> Result<Polynomial, GraphError> {
    let mut acc = Polynomial::one(g.space());
    for &v in walk {
        if v >= g.n() {
            return Err(GraphError::NodeOutOfRange { node: v, n: g.n() });
        }
    }
    for pair in walk.windows(2) {
        let w = g
            .weight(pair[0], pair[1])
            .ok_or(GraphError::NotAnEdge {
                from: pair[0],
                to: pair[1],
            })?;
        acc = acc.mul(w).expect("weights share the graph space");
    }
    Ok(acc)
}

/// An edge inside a strong component whose weight is not constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub from: usize,
    pub to: usize,
    pub component: usize,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub pass: bool,
    pub witnesses: Vec<Witness>,
}

/// Every cycle has a constant weight product iff every edge inside a strong
/// component (self-loops included) has a constant weight: each such edge lies
/// on a cycle, and a product of nonzero polynomials is constant only when each
/// factor is.
pub fn check_condition(g: &Wdg, d: &SccDecomposition) -> ConditionReport {
    let witnesses: Vec<Witness> = g
        .edges()
        .filter(|&(i, j, w)| d.component_of(i) == d.component_of(j) && !w.is_constant())
        .map(|(i, j, w)| Witness {
            from: i,
            to: j,
            component: d.component_of(i),
            weight: alloc::format!("{w}"),
        })
        .collect();
    ConditionReport {
        pass: witnesses.is_empty(),
        witnesses,
    }
}

pub const DEFAULT_MAX_CYCLE_NODES: usize = 8;

/// All simple cycles with their weight products. Each cycle is listed once,
/// starting from its smallest node, without repeating the start at the end.
pub fn enumerate_cycle_products(
    g: &Wdg,
    max_nodes: usize,
) -> Result<Vec<(Vec<usize>, Polynomial)>, GraphError> {
    let n = g.n();
    if n > max_nodes {
        return Err(GraphError::TooManyNodes { n, max: max_nodes });
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.push(start);
        on_path[start] = true;
        extend_cycles(g, start, &mut path, &mut on_path, &mut out);
        on_path[start] = false;
        path.pop();
    }
    Ok(out)
}

fn extend_cycles(
    g: &Wdg,
    start: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<(Vec<usize>, Polynomial)>,
) {
    let last = *path.last().expect("path starts at start");
    for &next in g.successors(last) {
        if next == start {
            let mut closed = path.clone();
            closed.push(start);
            let w = walk_weight(g, &closed).expect("walk follows edges");
            out.push((path.clone(), w));
        } else if next > start && !on_path[next] {
            path.push(next);
            on_path[next] = true;
            extend_cycles(g, start, path, on_path, out);
            on_path[next] = false;
            path.pop();
        }
    }
}

/// Weakly connected components, each sorted, ordered by smallest member.
pub fn weak_components(g: &Wdg) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (i, j, _) in g.edges() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}
