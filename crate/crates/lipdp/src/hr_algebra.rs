//! Terms over k-graphs: constants introducing single vertices and edges,
//! parallel composition gluing equal-indexed sources, and source
//! forgetting. Includes the construction of a low-height parse tree from a
//! balanced binary tree decomposition.
//!
//! Every constant carries the original vertex id of the denoted graph, so
//! evaluation can check source discipline and the dynamic programming can
//! report solutions as subsets of the original vertex set.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, Label};
use crate::tree_decomp::{validate, TreeDecomposition};

/// Multiplier pinning the parse-tree height bound: terms built by
/// [`ParseTree::from_decomposition`] have height at most
/// `TERM_HEIGHT_C * (log2(k + 2) + height(td))` where `k` is the
/// decomposition width.
pub const TERM_HEIGHT_C: f64 = 4.0;

pub type NodeId = usize;

/// A vertex occurrence inside a constant: the slot it occupies, the
/// original vertex id, and an optional role label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstVertex {
    pub slot: usize,
    pub vid: u32,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermNode {
    /// The empty graph.
    Empty,
    /// A single vertex occupying one slot.
    Vertex(ConstVertex),
    /// A single edge; both endpoints occupy slots.
    Edge(ConstVertex, ConstVertex),
    /// Parallel composition: glue equal-indexed non-nil sources.
    ParCom(NodeId, NodeId),
    /// Nil out the listed slots (nonempty, sorted).
    Forget(Vec<usize>, NodeId),
}

/// Arena-allocated term. Children are always created before their parent,
/// so node ids are a topological order; ids are stable and seed the
/// per-node randomness downstream.
#[derive(Debug, Clone)]
pub struct ParseTree {
    slots: usize,
    nodes: Vec<TermNode>,
    has_parent: Vec<bool>,
}

impl ParseTree {
    pub fn new(slots: usize) -> Self {
        ParseTree {
            slots,
            nodes: Vec::new(),
            has_parent: Vec::new(),
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TermNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TermNode] {
        &self.nodes
    }

    fn push(&mut self, node: TermNode) -> NodeId {
        self.nodes.push(node);
        self.has_parent.push(false);
        self.nodes.len() - 1
    }

    fn claim(&mut self, child: NodeId) -> Result<()> {
        if child >= self.nodes.len() {
            return Err(Error::contract(format!(
                "child node {child} does not exist"
            )));
        }
        if self.has_parent[child] {
            return Err(Error::contract(format!(
                "node {child} already has a parent"
            )));
        }
        self.has_parent[child] = true;
        Ok(())
    }

    pub fn add_empty(&mut self) -> NodeId {
        self.push(TermNode::Empty)
    }

    pub fn add_vertex(&mut self, slot: usize, vid: u32, label: Option<Label>) -> Result<NodeId> {
        if slot >= self.slots {
            return Err(Error::contract(format!(
                "slot {slot} out of range (k = {})",
                self.slots
            )));
        }
        Ok(self.push(TermNode::Vertex(ConstVertex { slot, vid, label })))
    }

    pub fn add_edge(&mut self, a: ConstVertex, b: ConstVertex) -> Result<NodeId> {
        if a.slot >= self.slots || b.slot >= self.slots {
            return Err(Error::contract("edge slot out of range"));
        }
        if a.slot == b.slot || a.vid == b.vid {
            return Err(Error::contract("edge endpoints must be distinct"));
        }
        Ok(self.push(TermNode::Edge(a, b)))
    }

    pub fn add_parcom(&mut self, left: NodeId, right: NodeId) -> Result<NodeId> {
        self.claim(left)?;
        self.claim(right)?;
        Ok(self.push(TermNode::ParCom(left, right)))
    }

    pub fn add_forget(&mut self, mut slots: Vec<usize>, child: NodeId) -> Result<NodeId> {
        if slots.is_empty() {
            return Err(Error::contract("forget set must be nonempty"));
        }
        slots.sort_unstable();
        slots.dedup();
        if slots.iter().any(|&s| s >= self.slots) {
            return Err(Error::contract("forget slot out of range"));
        }
        self.claim(child)?;
        Ok(self.push(TermNode::Forget(slots, child)))
    }

    /// The unique parentless node.
    pub fn root(&self) -> Result<NodeId> {
        let mut root = None;
        for (i, has) in self.has_parent.iter().enumerate() {
            if !has && root.replace(i).is_some() {
                return Err(Error::contract("term has multiple roots"));
            }
        }
        root.ok_or_else(|| Error::contract("term is empty"))
    }

    /// Maximum distance from the root to a leaf.
    pub fn height(&self) -> usize {
        let mut h = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            h[i] = match node {
                TermNode::Empty | TermNode::Vertex(_) | TermNode::Edge(..) => 0,
                TermNode::ParCom(l, r) => 1 + h[*l].max(h[*r]),
                TermNode::Forget(_, c) => 1 + h[*c],
            };
        }
        self.root().map(|r| h[r]).unwrap_or(0)
    }

    /// Evaluates the term to its denoted k-graph, checking source
    /// discipline: co-occupied slots must carry the same vertex, and the
    /// vertex sets of composed subterms may only overlap on glued sources.
    pub fn eval(&self) -> Result<KGraph> {
        let root = self.root()?;
        let mut results: Vec<Option<KGraph>> = (0..self.nodes.len()).map(|_| None).collect();
        for (i, node) in self.nodes.iter().enumerate() {
            let kg = match node {
                TermNode::Empty => KGraph::empty(self.slots),
                TermNode::Vertex(v) => {
                    let mut kg = KGraph::empty(self.slots);
                    kg.verts.insert(v.vid);
                    kg.src[v.slot] = Some(v.vid);
                    kg
                }
                TermNode::Edge(a, b) => {
                    let mut kg = KGraph::empty(self.slots);
                    kg.verts.insert(a.vid);
                    kg.verts.insert(b.vid);
                    kg.edges.insert((a.vid.min(b.vid), a.vid.max(b.vid)));
                    kg.src[a.slot] = Some(a.vid);
                    kg.src[b.slot] = Some(b.vid);
                    kg
                }
                TermNode::ParCom(l, r) => {
                    let left = results[*l].take().expect("child evaluated");
                    let right = results[*r].take().expect("child evaluated");
                    KGraph::parcom(left, right)?
                }
                TermNode::Forget(slots, c) => {
                    let mut kg = results[*c].take().expect("child evaluated");
                    for &s in slots {
                        kg.src[s] = None;
                    }
                    kg
                }
            };
            results[i] = Some(kg);
        }
        Ok(results[root].take().expect("root evaluated"))
    }

    /// S-expression rendering for debugging and golden tests.
    pub fn to_sexp(&self) -> String {
        fn rec(tree: &ParseTree, id: NodeId, out: &mut String) {
            match tree.node(id) {
                TermNode::Empty => out.push_str("(empty)"),
                TermNode::Vertex(v) => {
                    let _ = write!(out, "(v {} @{})", v.slot, v.vid);
                }
                TermNode::Edge(a, b) => {
                    let _ = write!(out, "(e {} {} @{} @{})", a.slot, b.slot, a.vid, b.vid);
                }
                TermNode::ParCom(l, r) => {
                    out.push_str("(// ");
                    rec(tree, *l, out);
                    out.push(' ');
                    rec(tree, *r, out);
                    out.push(')');
                }
                TermNode::Forget(slots, c) => {
                    out.push_str("(fg {");
                    for (i, s) in slots.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{s}");
                    }
                    out.push_str("} ");
                    rec(tree, *c, out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        if let Ok(root) = self.root() {
            rec(self, root, &mut out);
        }
        out
    }

    /// Builds a parse tree denoting `g` from a valid binary decomposition.
    ///
    /// Vertices and edges are introduced at the root-most bag containing
    /// them; within a bag, shared vertices keep the parent's slots and
    /// fresh vertices take the lowest free slots in sorted id order. A
    /// final forget over the root bag's slots leaves the evaluated graph
    /// without sources.
    pub fn from_decomposition(td: &TreeDecomposition, g: &Graph) -> Result<ParseTree> {
        let report = validate(td, g);
        if !report.is_valid() {
            return Err(Error::contract(format!(
                "invalid tree decomposition: {report:?}"
            )));
        }
        if !td.is_binary() {
            return Err(Error::contract(
                "decomposition must be binary; balance it first",
            ));
        }
        if g.n() == 0 {
            let mut t = ParseTree::new(1);
            t.add_empty();
            return Ok(t);
        }
        let slots = (td.width().max(0) as usize) + 1;
        let mut tree = ParseTree::new(slots);
        let order = td.bfs_order();
        let children = td.children();

        // Root-most introduction points. BFS order is depth-nondecreasing,
        // so the first occurrence seen is the occurrence-subtree root.
        let mut vertex_home = vec![usize::MAX; g.n()];
        let mut new_vertices: Vec<Vec<usize>> = vec![Vec::new(); td.len()];
        for &b in &order {
            for v in td.bags()[b].iter() {
                if vertex_home[v] == usize::MAX {
                    vertex_home[v] = b;
                    new_vertices[b].push(v);
                }
            }
        }
        let mut occ: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
        for &b in &order {
            for v in td.bags()[b].iter() {
                occ[v].push(b);
            }
        }
        let mut new_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); td.len()];
        for &(a, b) in g.edges() {
            let (short, other) = if occ[a].len() <= occ[b].len() {
                (a, b)
            } else {
                (b, a)
            };
            let home = occ[short]
                .iter()
                .copied()
                .find(|&bag| td.bags()[bag].contains(other))
                .expect("validated decomposition covers every edge");
            new_edges[home].push((a, b));
        }

        // Slot frames, assigned top-down.
        let mut frame: Vec<HashMap<usize, usize>> = vec![HashMap::new(); td.len()];
        for &b in &order {
            let mut used: Vec<bool> = vec![false; slots];
            if let Some(p) = td.parent(b) {
                for v in td.bags()[b].iter() {
                    if let Some(&s) = frame[p].get(&v) {
                        frame[b].insert(v, s);
                        used[s] = true;
                    }
                }
            }
            let mut free = (0..slots).filter(|&s| !used[s]);
            for v in td.bags()[b].iter() {
                frame[b]
                    .entry(v)
                    .or_insert_with(|| free.next().expect("bag fits in slot budget"));
            }
        }

        // Terms bottom-up (reverse BFS order).
        let mut term_of: Vec<Option<NodeId>> = vec![None; td.len()];
        for &b in order.iter().rev() {
            let mut items: Vec<NodeId> = Vec::new();
            for &v in &new_vertices[b] {
                items.push(tree.add_vertex(frame[b][&v], v as u32, g.label(v))?);
            }
            for &(x, y) in &new_edges[b] {
                let cx = ConstVertex {
                    slot: frame[b][&x],
                    vid: x as u32,
                    label: g.label(x),
                };
                let cy = ConstVertex {
                    slot: frame[b][&y],
                    vid: y as u32,
                    label: g.label(y),
                };
                items.push(tree.add_edge(cx, cy)?);
            }
            // Balanced pairing keeps the local subterm at logarithmic height.
            while items.len() > 1 {
                let mut next = Vec::with_capacity(items.len().div_ceil(2));
                for pair in items.chunks(2) {
                    next.push(if pair.len() == 2 {
                        tree.add_parcom(pair[0], pair[1])?
                    } else {
                        pair[0]
                    });
                }
                items = next;
            }
            let mut parts: Vec<NodeId> = items;
            for &c in &children[b] {
                let sub = term_of[c].expect("children built first");
                let forgotten: Vec<usize> = td.bags()[c]
                    .iter()
                    .filter(|v| !td.bags()[b].contains(*v))
                    .map(|v| frame[c][&v])
                    .collect();
                parts.push(if forgotten.is_empty() {
                    sub
                } else {
                    tree.add_forget(forgotten, sub)?
                });
            }
            let combined = match parts.len() {
                0 => tree.add_empty(),
                1 => parts[0],
                _ => {
                    let mut acc = parts[0];
                    for &p in &parts[1..] {
                        acc = tree.add_parcom(acc, p)?;
                    }
                    acc
                }
            };
            term_of[b] = Some(combined);
        }

        let root_bag = td.root();
        let root_term = term_of[root_bag].expect("root built");
        let final_slots: Vec<usize> = td.bags()[root_bag]
            .iter()
            .map(|v| frame[root_bag][&v])
            .collect();
        if !final_slots.is_empty() {
            tree.add_forget(final_slots, root_term)?;
        }
        Ok(tree)
    }
}

/// A graph with k source slots; vertices are original ids of the denoted
/// graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGraph {
    pub verts: BTreeSet<u32>,
    pub edges: BTreeSet<(u32, u32)>,
    pub src: Vec<Option<u32>>,
}

impl KGraph {
    fn empty(slots: usize) -> Self {
        KGraph {
            verts: BTreeSet::new(),
            edges: BTreeSet::new(),
            src: vec![None; slots],
        }
    }

    /// Occupied sources as (slot, vid), slot-ascending.
    pub fn sources(&self) -> Vec<(usize, u32)> {
        self.src
            .iter()
            .enumerate()
            .filter_map(|(s, v)| v.map(|v| (s, v)))
            .collect()
    }

    fn parcom(mut left: KGraph, mut right: KGraph) -> Result<KGraph> {
        let mut glued = BTreeSet::new();
        for s in 0..left.src.len() {
            match (left.src[s], right.src[s]) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::contract(format!(
                        "slot {s} holds different vertices ({a} vs {b}) in composed terms"
                    )));
                }
                (Some(a), Some(_)) => {
                    glued.insert(a);
                }
                _ => {}
            }
        }
        // Vertex overlap beyond glued sources would silently merge
        // distinct occurrences.
        let (small, large) = if left.verts.len() <= right.verts.len() {
            (&left.verts, &right.verts)
        } else {
            (&right.verts, &left.verts)
        };
        for v in small {
            if large.contains(v) && !glued.contains(v) {
                return Err(Error::contract(format!(
                    "vertex {v} appears in both composed terms without being a glued source"
                )));
            }
        }
        // Merge the smaller side into the larger.
        if left.verts.len() < right.verts.len() {
            std::mem::swap(&mut left, &mut right);
        }
        left.verts.extend(right.verts);
        left.edges.extend(right.edges);
        for s in 0..left.src.len() {
            if left.src[s].is_none() {
                left.src[s] = right.src[s];
            }
        }
        Ok(left)
    }

    /// True when the vertex and edge sets equal those of `g` exactly.
    pub fn matches(&self, g: &Graph) -> bool {
        if self.verts.len() != g.n() || self.edges.len() != g.edges().len() {
            return false;
        }
        if !(0..g.n() as u32).all(|v| self.verts.contains(&v)) {
            return false;
        }
        g.edges()
            .iter()
            .all(|&(a, b)| self.edges.contains(&(a as u32, b as u32)))
    }
}
