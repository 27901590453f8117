//! Weighted undirected graphs, weight vectors, single-coordinate
//! perturbations, BFS layering, and the weighted Hamming distance.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex role tag used by incidence graphs of CNF instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// A variable vertex (carries the variable index).
    Variable(u32),
    /// The negated companion of a variable.
    NegVariable(u32),
    /// A clause vertex (carries the clause index).
    Clause(u32),
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    labels: Option<Vec<Label>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges, and
    /// out-of-range endpoints.
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edge_list {
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}) out of range, n={n}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::invalid(format!("duplicate edge ({},{})", e.0, e.1)));
            }
            edges.push(e);
            adj[a].push(b);
            adj[b].push(a);
        }
        edges.sort_unstable();
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            adj,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid(format!(
                "label vector length {} does not match n={}",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn label(&self, v: usize) -> Option<Label> {
        self.labels.as_ref().map(|l| l[v])
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Vertex-induced subgraph. Returns the subgraph together with the map
    /// from new ids to original ids (`keep` order defines the new ids).
    pub fn induced(&self, keep: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let mut back = Vec::with_capacity(keep.len());
        let mut fwd = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.n {
                return Err(Error::invalid(format!("vertex {old} out of range")));
            }
            if fwd[old] != usize::MAX {
                return Err(Error::invalid(format!(
                    "vertex {old} repeated in induced set"
                )));
            }
            fwd[old] = new;
            back.push(old);
        }
        let mut edges = Vec::new();
        for &(a, b) in &self.edges {
            if fwd[a] != usize::MAX && fwd[b] != usize::MAX {
                edges.push((fwd[a], fwd[b]));
            }
        }
        let mut sub = Graph::new(keep.len(), &edges)?;
        if let Some(labels) = &self.labels {
            sub = sub.with_labels(back.iter().map(|&v| labels[v]).collect())?;
        }
        Ok((sub, back))
    }

    /// Parses the plain-text edge list format: first line `n m`, then `m`
    /// lines `u v`, then optionally `n` lines `v weight`.
    pub fn parse(text: &str) -> Result<(Graph, Option<WeightVector>)> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::parse(format!("unexpected end of input, expected {what}")))
        };
        let n: usize = next("n")?
            .parse()
            .map_err(|e| Error::parse(format!("n: {e}")))?;
        let m: usize = next("m")?
            .parse()
            .map_err(|e| Error::parse(format!("m: {e}")))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u: usize = next("edge endpoint")?
                .parse()
                .map_err(|e| Error::parse(format!("edge endpoint: {e}")))?;
            let v: usize = next("edge endpoint")?
                .parse()
                .map_err(|e| Error::parse(format!("edge endpoint: {e}")))?;
            edges.push((u, v));
        }
        let g = Graph::new(n, &edges)?;
        let rest: Vec<&str> = tokens.collect();
        if rest.is_empty() {
            return Ok((g, None));
        }
        if rest.len() != 2 * n {
            return Err(Error::parse(format!(
                "expected {} weight tokens (v weight per vertex), found {}",
                2 * n,
                rest.len()
            )));
        }
        let mut w = vec![f64::NAN; n];
        for pair in rest.chunks(2) {
            let v: usize = pair[0]
                .parse()
                .map_err(|e| Error::parse(format!("vertex: {e}")))?;
            let x: f64 = pair[1]
                .parse()
                .map_err(|e| Error::parse(format!("weight: {e}")))?;
            if v >= n {
                return Err(Error::parse(format!("weight line vertex {v} out of range")));
            }
            w[v] = x;
        }
        if w.iter().any(|x| x.is_nan()) {
            return Err(Error::parse("missing weight line for some vertex"));
        }
        Ok((g, Some(WeightVector::new(w)?)))
    }

    pub fn parse_file(path: &Path) -> Result<(Graph, Option<WeightVector>)> {
        Graph::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self, weights: Option<&WeightVector>) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        if let Some(w) = weights {
            for v in 0..self.n {
                out.push_str(&format!("{} {}\n", v, w[v]));
            }
        }
        out
    }
}

/// Non-negative per-vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        for (i, &x) in w.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::invalid(format!(
                    "weight[{i}] = {x} must be finite and >= 0"
                )));
            }
        }
        Ok(WeightVector(w))
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Returns a copy with entry `u` increased by `delta`; the input is
    /// unchanged.
    pub fn perturb(&self, u: usize, delta: f64) -> Result<WeightVector> {
        if u >= self.0.len() {
            return Err(Error::invalid(format!(
                "vertex {u} out of range, n={}",
                self.0.len()
            )));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::invalid(format!(
                "delta = {delta} must be finite and >= 0"
            )));
        }
        let mut w = self.0.clone();
        w[u] += delta;
        Ok(WeightVector(w))
    }

    /// Total weight of a vertex set, summed in ascending vertex order.
    pub fn weight_of(&self, set: &VertexSet) -> f64 {
        set.iter().map(|v| self.0[v]).sum()
    }

    pub fn l1_distance(&self, other: &WeightVector) -> f64 {
        assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Parses a whitespace-delimited file of `n` reals.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let vals: std::result::Result<Vec<f64>, _> =
            text.split_whitespace().map(str::parse).collect();
        let vals = vals.map_err(|e| Error::parse(format!("weight: {e}")))?;
        if vals.len() != n {
            return Err(Error::parse(format!(
                "expected {n} weights, found {}",
                vals.len()
            )));
        }
        WeightVector::new(vals)
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A sorted set of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn insert(&mut self, v: usize) {
        if let Err(pos) = self.0.binary_search(&v) {
            self.0.insert(pos, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Weighted Hamming distance between `(x1, w1)` and `(x2, w2)`:
/// the l1 distance between the weighted indicator vectors, i.e.
/// `sum_{v in both} |w1_v - w2_v| + sum_{v only in x1} w1_v + sum_{v only in x2} w2_v`.
pub fn weighted_hamming(
    x1: &VertexSet,
    w1: &WeightVector,
    x2: &VertexSet,
    w2: &WeightVector,
) -> Result<f64> {
    if w1.len() != w2.len() {
        return Err(Error::invalid(format!(
            "weight length mismatch: {} vs {}",
            w1.len(),
            w2.len()
        )));
    }
    let mut d = 0.0;
    for v in x1.iter() {
        if x2.contains(v) {
            d += (w1[v] - w2[v]).abs();
        } else {
            d += w1[v];
        }
    }
    for v in x2.iter() {
        if !x1.contains(v) {
            d += w2[v];
        }
    }
    Ok(d)
}

/// BFS layers from `root`: layer `i` holds the vertices at distance exactly
/// `i`. Vertices unreachable from `root` are collected into one extra final
/// layer, so every vertex appears in exactly one layer.
pub fn bfs_layers(g: &Graph, root: usize) -> Result<Vec<VertexSet>> {
    if root >= g.n() {
        return Err(Error::invalid(format!(
            "root {root} out of range, n={}",
            g.n()
        )));
    }
    let mut dist = vec![usize::MAX; g.n()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut max_d = 0;
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                max_d = max_d.max(dist[u]);
                queue.push_back(u);
            }
        }
    }
    let mut layers = vec![Vec::new(); max_d + 1];
    let mut overflow = Vec::new();
    for v in 0..g.n() {
        if dist[v] == usize::MAX {
            overflow.push(v);
        } else {
            layers[dist[v]].push(v);
        }
    }
    let mut out: Vec<VertexSet> = layers.into_iter().map(VertexSet::from_iter).collect();
    if !overflow.is_empty() {
        out.push(VertexSet::from_iter(overflow));
    }
    Ok(out)
}
