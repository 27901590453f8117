//! Randomized bottom-up dynamic programming over a parse tree, generic in
//! a hand-instantiated transition system.
//!
//! `compute_opt` fills a table of exact optimal values per (node, state);
//! `extract` then walks top-down, choosing a branch at every composition
//! and forget node by soft selection applied to the exact subtotals, and
//! unions the committed vertex sets along the chosen path. The randomized
//! solution never feeds back into the value table.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Label, VertexSet, WeightVector};
use crate::hr_algebra::{NodeId, ParseTree, TermNode};
use crate::soft_select::{
    hard_argmax, hard_argmin, softargmax, softargmin, substream, Selection, SoftConfig,
};

/// Maximum slot count the table encodings support (two bits per slot fit
/// in a 64-bit state).
pub const MAX_SLOTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Max,
    Min,
}

/// Problem-specific DP state, encoded in 64 bits. The state of the empty
/// source set is always `State(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub u64);

impl State {
    pub const EMPTY: State = State(0);
}

/// One occupied slot of a term node's k-graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotInfo {
    pub slot: usize,
    pub vid: u32,
    pub label: Option<Label>,
}

/// The source structure of a term node: occupied slots and the edges of
/// the evaluated subgraph both of whose endpoints are current sources.
#[derive(Debug, Clone, Default)]
pub struct SourceView {
    pub slots: Vec<SlotInfo>,
    pub edges: Vec<(usize, usize)>,
}

impl SourceView {
    pub fn occupied_mask(&self) -> u64 {
        self.slots.iter().fold(0, |m, s| m | (1u64 << s.slot))
    }

    pub fn slot_info(&self, slot: usize) -> Option<&SlotInfo> {
        self.slots.iter().find(|s| s.slot == slot)
    }

    /// True when some source edge joins two slots inside `mask`.
    pub fn has_edge_within(&self, mask: u64) -> bool {
        self.edges
            .iter()
            .any(|&(a, b)| mask & (1 << a) != 0 && mask & (1 << b) != 0)
    }
}

/// Leaf constants as seen by a transition system.
#[derive(Debug, Clone, Copy)]
pub enum LeafView<'a> {
    Empty,
    Vertex(&'a SlotInfo),
    Edge(&'a SlotInfo, &'a SlotInfo),
}

/// A hand-instantiated family of DP transitions: the per-node state space,
/// leaf feasibility, and the disjoint branch decompositions at parallel
/// composition and forget nodes.
pub trait TransitionSystem {
    fn name(&self) -> &'static str;
    fn direction(&self) -> Direction;

    /// All states valid at a node with the given sources.
    fn states(&self, view: &SourceView) -> Vec<State>;

    fn leaf_feasible(&self, leaf: &LeafView, state: State) -> bool;

    /// Disjoint decomposition of `state` into (left, right) child states.
    fn parcom_rules(
        &self,
        left: &SourceView,
        right: &SourceView,
        state: State,
    ) -> Vec<(State, State)>;

    /// Branches across a forget: child state plus the newly committed
    /// original vertex ids.
    fn forget_rules(
        &self,
        child: &SourceView,
        forgotten: &[SlotInfo],
        state: State,
    ) -> Vec<(State, Vec<u32>)>;

    /// Structural check of a leaf constant (e.g. required labels).
    fn check_leaf(&self, _leaf: &LeafView) -> Result<()> {
        Ok(())
    }
}

/// The filled value table: exact optimal values per (node, state), plus
/// the largest branch count encountered while filling it.
pub struct DpTable {
    views: Vec<SourceView>,
    states: Vec<Vec<State>>,
    index: Vec<HashMap<u64, u32>>,
    opt: Vec<Vec<Option<f64>>>,
    p_max: usize,
    root: NodeId,
}

#[derive(Serialize)]
struct CellDump {
    node: usize,
    state: u64,
    opt: Option<f64>,
}

impl DpTable {
    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn view(&self, node: NodeId) -> &SourceView {
        &self.views[node]
    }

    pub fn opt_of(&self, node: NodeId, state: State) -> Option<f64> {
        let idx = *self.index[node].get(&state.0)?;
        self.opt[node][idx as usize]
    }

    /// Value of the root cell (empty source set, full constraint).
    pub fn root_opt(&self) -> Option<f64> {
        self.opt_of(self.root, State::EMPTY)
    }

    /// Smallest strictly positive value in the table, if any.
    pub fn min_positive_opt(&self) -> Option<f64> {
        self.opt
            .iter()
            .flatten()
            .filter_map(|v| *v)
            .filter(|&v| v > 0.0)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.min(v)))
            })
    }

    pub fn to_json(&self) -> String {
        let mut cells = Vec::new();
        for (node, states) in self.states.iter().enumerate() {
            for (i, s) in states.iter().enumerate() {
                cells.push(CellDump {
                    node,
                    state: s.0,
                    opt: self.opt[node][i],
                });
            }
        }
        serde_json::json!({ "p_max": self.p_max, "cells": cells }).to_string()
    }
}

/// Per-node source views, computed bottom-up with slot-consistency checks.
pub fn compute_views(tree: &ParseTree) -> Result<Vec<SourceView>> {
    if tree.slots() > MAX_SLOTS {
        return Err(Error::contract(format!(
            "term uses {} slots, table encodings support at most {MAX_SLOTS}",
            tree.slots()
        )));
    }
    let mut views: Vec<SourceView> = Vec::with_capacity(tree.len());
    for node in tree.nodes() {
        let view = match node {
            TermNode::Empty => SourceView::default(),
            TermNode::Vertex(v) => SourceView {
                slots: vec![SlotInfo {
                    slot: v.slot,
                    vid: v.vid,
                    label: v.label,
                }],
                edges: Vec::new(),
            },
            TermNode::Edge(a, b) => {
                let mut slots = vec![
                    SlotInfo {
                        slot: a.slot,
                        vid: a.vid,
                        label: a.label,
                    },
                    SlotInfo {
                        slot: b.slot,
                        vid: b.vid,
                        label: b.label,
                    },
                ];
                slots.sort_by_key(|s| s.slot);
                let edge = (a.slot.min(b.slot), a.slot.max(b.slot));
                SourceView {
                    slots,
                    edges: vec![edge],
                }
            }
            TermNode::ParCom(l, r) => {
                let (lv, rv) = (&views[*l], &views[*r]);
                let mut slots: Vec<SlotInfo> = Vec::new();
                let (mut i, mut j) = (0, 0);
                while i < lv.slots.len() || j < rv.slots.len() {
                    let take_left = j >= rv.slots.len()
                        || (i < lv.slots.len() && lv.slots[i].slot <= rv.slots[j].slot);
                    if take_left {
                        let s = lv.slots[i];
                        if j < rv.slots.len() && rv.slots[j].slot == s.slot {
                            if rv.slots[j].vid != s.vid {
                                return Err(Error::contract(format!(
                                    "slot {} holds vertices {} and {} across a composition",
                                    s.slot, s.vid, rv.slots[j].vid
                                )));
                            }
                            j += 1;
                        }
                        slots.push(s);
                        i += 1;
                    } else {
                        slots.push(rv.slots[j]);
                        j += 1;
                    }
                }
                let mut seen = HashMap::new();
                for s in &slots {
                    if let Some(prev) = seen.insert(s.vid, s.slot) {
                        return Err(Error::contract(format!(
                            "vertex {} occupies slots {} and {} after composition",
                            s.vid, prev, s.slot
                        )));
                    }
                }
                let mut edges = lv.edges.clone();
                edges.extend_from_slice(&rv.edges);
                edges.sort_unstable();
                edges.dedup();
                SourceView { slots, edges }
            }
            TermNode::Forget(b, c) => {
                let cv = &views[*c];
                let gone = |slot: usize| b.contains(&slot);
                SourceView {
                    slots: cv.slots.iter().filter(|s| !gone(s.slot)).copied().collect(),
                    edges: cv
                        .edges
                        .iter()
                        .filter(|&&(x, y)| !gone(x) && !gone(y))
                        .copied()
                        .collect(),
                }
            }
        };
        views.push(view);
    }
    Ok(views)
}

fn leaf_view<'a>(node: &TermNode, view: &'a SourceView) -> Option<LeafView<'a>> {
    match node {
        TermNode::Empty => Some(LeafView::Empty),
        TermNode::Vertex(_) => Some(LeafView::Vertex(&view.slots[0])),
        TermNode::Edge(..) => Some(LeafView::Edge(&view.slots[0], &view.slots[1])),
        _ => None,
    }
}

fn forgotten_infos(child: &SourceView, b: &[usize]) -> Vec<SlotInfo> {
    child
        .slots
        .iter()
        .filter(|s| b.contains(&s.slot))
        .copied()
        .collect()
}

fn committed_weight(w: &WeightVector, vids: &[u32]) -> f64 {
    vids.iter().map(|&v| w[v as usize]).sum()
}

fn better(direction: Direction, a: f64, b: f64) -> f64 {
    match direction {
        Direction::Max => a.max(b),
        Direction::Min => a.min(b),
    }
}

/// Fills the exact value table bottom-up. Base cells carry value 0 when
/// feasible; forget cells add the committed weight of each branch; nil
/// (infeasible) propagates by being skipped in the extremum.
pub fn compute_opt(
    tree: &ParseTree,
    ts: &dyn TransitionSystem,
    w: &WeightVector,
) -> Result<DpTable> {
    let root = tree.root()?;
    let views = compute_views(tree)?;
    for view in &views {
        for s in &view.slots {
            if s.vid as usize >= w.len() {
                return Err(Error::contract(format!(
                    "term references vertex {} beyond weight vector length {}",
                    s.vid,
                    w.len()
                )));
            }
        }
    }
    let dir = ts.direction();
    let n = tree.len();
    let mut states: Vec<Vec<State>> = Vec::with_capacity(n);
    let mut index: Vec<HashMap<u64, u32>> = Vec::with_capacity(n);
    let mut opt: Vec<Vec<Option<f64>>> = Vec::with_capacity(n);
    let mut p_max = 0usize;

    for (id, node) in tree.nodes().iter().enumerate() {
        let view = &views[id];
        let node_states = ts.states(view);
        let node_index: HashMap<u64, u32> = node_states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.0, i as u32))
            .collect();
        let mut node_opt = vec![None; node_states.len()];
        match node {
            TermNode::Empty | TermNode::Vertex(_) | TermNode::Edge(..) => {
                let leaf = leaf_view(node, view).expect("leaf");
                ts.check_leaf(&leaf)?;
                for (i, &s) in node_states.iter().enumerate() {
                    if ts.leaf_feasible(&leaf, s) {
                        node_opt[i] = Some(0.0);
                    }
                }
            }
            TermNode::ParCom(l, r) => {
                for (i, &s) in node_states.iter().enumerate() {
                    let rules = ts.parcom_rules(&views[*l], &views[*r], s);
                    p_max = p_max.max(rules.len());
                    let mut acc: Option<f64> = None;
                    for (sl, sr) in rules {
                        let vl = index[*l].get(&sl.0).and_then(|&k| opt[*l][k as usize]);
                        let vr = index[*r].get(&sr.0).and_then(|&k| opt[*r][k as usize]);
                        if let (Some(vl), Some(vr)) = (vl, vr) {
                            let v = vl + vr;
                            acc = Some(acc.map_or(v, |a| better(dir, a, v)));
                        }
                    }
                    node_opt[i] = acc;
                }
            }
            TermNode::Forget(b, c) => {
                let forgotten = forgotten_infos(&views[*c], b);
                for (i, &s) in node_states.iter().enumerate() {
                    let rules = ts.forget_rules(&views[*c], &forgotten, s);
                    p_max = p_max.max(rules.len());
                    let mut acc: Option<f64> = None;
                    for (sc, vids) in rules {
                        if let Some(vc) = index[*c].get(&sc.0).and_then(|&k| opt[*c][k as usize]) {
                            let v = vc + committed_weight(w, &vids);
                            acc = Some(acc.map_or(v, |a| better(dir, a, v)));
                        }
                    }
                    node_opt[i] = acc;
                }
            }
        }
        states.push(node_states);
        index.push(node_index);
        opt.push(node_opt);
    }
    Ok(DpTable {
        views,
        states,
        index,
        opt,
        p_max,
        root,
    })
}

/// Branch selection mode for extraction.
#[derive(Debug, Clone, Copy)]
pub enum Selector {
    /// Exponential-mechanism selection with the given per-node epsilon.
    Soft { epsilon_per_node: f64 },
    /// Deterministic extremum (the eps -> 0 reference mode).
    Hard,
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    pub selector: Selector,
    pub seed: u64,
}

impl ExtractConfig {
    pub fn soft(epsilon_per_node: f64, seed: u64) -> Self {
        ExtractConfig {
            selector: Selector::Soft { epsilon_per_node },
            seed,
        }
    }

    pub fn hard() -> Self {
        ExtractConfig {
            selector: Selector::Hard,
            seed: 0,
        }
    }
}

fn select(
    dir: Direction,
    values: &[f64],
    cfg: &ExtractConfig,
    node: NodeId,
    state: State,
) -> Result<Selection> {
    match cfg.selector {
        Selector::Hard => match dir {
            Direction::Max => hard_argmax(values),
            Direction::Min => hard_argmin(values),
        },
        Selector::Soft { epsilon_per_node } => {
            let seed = substream(cfg.seed, node as u64, state.0);
            let mut sc = SoftConfig {
                epsilon: epsilon_per_node,
                rng: ChaCha8Rng::seed_from_u64(seed),
            };
            match dir {
                Direction::Max => softargmax(values, &mut sc),
                Direction::Min => softargmin(values, &mut sc),
            }
        }
    }
}

/// Top-down extraction: starts from the root cell (empty source set),
/// soft-selects a branch per node among the feasible ones using exact
/// subtotals from the table, and unions the committed sets.
pub fn extract(
    tree: &ParseTree,
    ts: &dyn TransitionSystem,
    w: &WeightVector,
    table: &DpTable,
    cfg: &ExtractConfig,
) -> Result<VertexSet> {
    let root = tree.root()?;
    if table.opt_of(root, State::EMPTY).is_none() {
        return Err(Error::Infeasible {
            state: format!("{}@root", ts.name()),
        });
    }
    let dir = ts.direction();
    let mut chosen: Vec<u32> = Vec::new();
    let mut stack: Vec<(NodeId, State)> = vec![(root, State::EMPTY)];
    while let Some((id, state)) = stack.pop() {
        match tree.node(id) {
            TermNode::Empty | TermNode::Vertex(_) | TermNode::Edge(..) => {}
            TermNode::ParCom(l, r) => {
                let rules = ts.parcom_rules(table.view(*l), table.view(*r), state);
                let mut feasible: Vec<(f64, State, State)> = Vec::new();
                for (sl, sr) in rules {
                    if let (Some(vl), Some(vr)) = (table.opt_of(*l, sl), table.opt_of(*r, sr)) {
                        feasible.push((vl + vr, sl, sr));
                    }
                }
                debug_assert!(!feasible.is_empty(), "feasible cell must have a branch");
                let values: Vec<f64> = feasible.iter().map(|f| f.0).collect();
                let pick = select(dir, &values, cfg, id, state)?;
                let (_, sl, sr) = feasible[pick.index];
                stack.push((*l, sl));
                stack.push((*r, sr));
            }
            TermNode::Forget(b, c) => {
                let forgotten = forgotten_infos(table.view(*c), b);
                let rules = ts.forget_rules(table.view(*c), &forgotten, state);
                let mut feasible: Vec<(f64, State, Vec<u32>)> = Vec::new();
                for (sc, vids) in rules {
                    if let Some(vc) = table.opt_of(*c, sc) {
                        feasible.push((vc + committed_weight(w, &vids), sc, vids));
                    }
                }
                debug_assert!(!feasible.is_empty(), "feasible cell must have a branch");
                let values: Vec<f64> = feasible.iter().map(|f| f.0).collect();
                let pick = select(dir, &values, cfg, id, state)?;
                let (_, sc, vids) = feasible.swap_remove(pick.index);
                chosen.extend(vids);
                stack.push((*c, sc));
            }
        }
    }
    Ok(VertexSet::from_iter(chosen.into_iter().map(|v| v as usize)))
}

/// Convenience wrapper: fill the table and extract once.
pub fn run_dp(
    tree: &ParseTree,
    ts: &dyn TransitionSystem,
    w: &WeightVector,
    cfg: &ExtractConfig,
) -> Result<VertexSet> {
    let table = compute_opt(tree, ts, w)?;
    extract(tree, ts, w, &table, cfg)
}

/// Per-node epsilon so that the whole extraction meets a total accuracy
/// target: `eps_total / h` for maximization and `eps_total / (2h)` for
/// minimization, where `h` is the term height; a zero-height term keeps
/// `eps_total`.
pub fn epsilon_schedule(eps_total: f64, tree: &ParseTree, direction: Direction) -> Result<f64> {
    if !(eps_total > 0.0 && eps_total <= 1.0) {
        return Err(Error::invalid(format!(
            "eps_total = {eps_total} must be in (0, 1]"
        )));
    }
    let h = tree.height();
    if h == 0 {
        return Ok(eps_total);
    }
    Ok(match direction {
        Direction::Max => eps_total / h as f64,
        Direction::Min => eps_total / (2.0 * h as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::hr_algebra::ParseTree;
    use crate::problems::{mwis_spec, Problem};
    use crate::tree_decomp::{balance, decompose_heuristic};

    fn mwis_table(g: &crate::graph::Graph, w: &WeightVector) -> (ParseTree, DpTable) {
        let td = balance(&decompose_heuristic(g)).unwrap();
        let tree = ParseTree::from_decomposition(&td, g).unwrap();
        let table = compute_opt(&tree, &mwis_spec(), w).unwrap();
        (tree, table)
    }

    #[test]
    fn single_vertex_mwis() {
        let g = crate::graph::Graph::new(1, &[]).unwrap();
        let w = WeightVector::new(vec![3.0]).unwrap();
        let (_, table) = mwis_table(&g, &w);
        assert_eq!(table.root_opt(), Some(3.0));
    }

    #[test]
    fn hand_term_with_duplicated_edge_constant() {
        // The same edge introduced twice and glued: exact-state semantics
        // must stay consistent for every problem.
        use crate::hr_algebra::ConstVertex;
        let mut tree = ParseTree::new(2);
        let a = ConstVertex { slot: 0, vid: 0, label: None };
        let b = ConstVertex { slot: 1, vid: 1, label: None };
        let e1 = tree.add_edge(a, b).unwrap();
        let e2 = tree.add_edge(a, b).unwrap();
        let p = tree.add_parcom(e1, e2).unwrap();
        tree.add_forget(vec![0, 1], p).unwrap();
        let w = WeightVector::new(vec![1.0, 3.0]).unwrap();
        let mwis = compute_opt(&tree, &mwis_spec(), &w).unwrap();
        assert_eq!(mwis.root_opt(), Some(3.0));
        let vc = compute_opt(&tree, &crate::problems::min_vertex_cover_spec(), &w).unwrap();
        assert_eq!(vc.root_opt(), Some(1.0));
        let ds = compute_opt(&tree, &crate::problems::min_dominating_set_spec(), &w).unwrap();
        assert_eq!(ds.root_opt(), Some(1.0));
    }

    #[test]
    fn p3_mwis_opt_and_hard_extraction() {
        let g = gen::path(3);
        let w = WeightVector::new(vec![1.0, 5.0, 1.0]).unwrap();
        let (tree, table) = mwis_table(&g, &w);
        assert_eq!(table.root_opt(), Some(5.0));
        let x = extract(&tree, &mwis_spec(), &w, &table, &ExtractConfig::hard()).unwrap();
        assert_eq!(w.weight_of(&x), 5.0);
        assert!(Problem::Mwis.validate_solution(&g, &x));
    }

    #[test]
    fn epsilon_schedule_values() {
        let g = gen::path(40);
        let td = balance(&decompose_heuristic(&g)).unwrap();
        let tree = ParseTree::from_decomposition(&td, &g).unwrap();
        let h = tree.height() as f64;
        let e_max = epsilon_schedule(0.5, &tree, Direction::Max).unwrap();
        let e_min = epsilon_schedule(0.5, &tree, Direction::Min).unwrap();
        assert!((e_max - 0.5 / h).abs() < 1e-15);
        assert!((e_min - 0.25 / h).abs() < 1e-15);

        let mut single = ParseTree::new(1);
        single.add_vertex(0, 0, None).unwrap();
        assert_eq!(epsilon_schedule(0.5, &single, Direction::Max).unwrap(), 0.5);
    }

    #[test]
    fn per_node_epsilon_bounds_statistical() {
        // Maximization: P3 with w = (1,5,1), eps_node = 0.1, 2000 runs:
        // mean weight >= (1 - h * eps_node) * opt - 3 SE.
        let g = gen::path(3);
        let w = WeightVector::new(vec![1.0, 5.0, 1.0]).unwrap();
        let (tree, table) = mwis_table(&g, &w);
        let h = tree.height() as f64;
        let spec = mwis_spec();
        let mut samples = Vec::new();
        for seed in 0..2000u64 {
            let x = extract(&tree, &spec, &w, &table, &ExtractConfig::soft(0.1, seed)).unwrap();
            samples.push(w.weight_of(&x));
        }
        let (mean, se) = crate::lab::mean_se(&samples);
        let bound = (1.0 - h * 0.1).max(0.0) * 5.0 - 3.0 * se;
        assert!(mean >= bound, "mean {mean} < {bound} (h = {h})");

        // Minimization: vertex cover on P4 with w = (2,1,1,2):
        // mean weight <= (1 + eps_node)^h * opt + 3 SE.
        let g = gen::path(4);
        let w = WeightVector::new(vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let td = balance(&decompose_heuristic(&g)).unwrap();
        let tree = ParseTree::from_decomposition(&td, &g).unwrap();
        let spec = crate::problems::min_vertex_cover_spec();
        let table = compute_opt(&tree, &spec, &w).unwrap();
        assert_eq!(table.root_opt(), Some(2.0));
        let h = tree.height() as f64;
        let mut samples = Vec::new();
        for seed in 0..2000u64 {
            let x = extract(&tree, &spec, &w, &table, &ExtractConfig::soft(0.1, seed)).unwrap();
            assert!(Problem::MinVertexCover.validate_solution(&g, &x));
            samples.push(w.weight_of(&x));
        }
        let (mean, se) = crate::lab::mean_se(&samples);
        let bound = 1.1f64.powf(h) * 2.0 + 3.0 * se;
        assert!(mean <= bound, "mean {mean} > {bound} (h = {h})");
    }

    #[test]
    fn p_max_bounded_by_forget_branching() {
        // For the independent-set rules, the branch count is 1 at
        // compositions and at most 2^|B| at forgets.
        for seed in 0..10u64 {
            let g = gen::random_graph(10, 14, seed);
            let w = gen::dyadic_weights(10, seed);
            let td = balance(&decompose_heuristic(&g)).unwrap();
            let tree = ParseTree::from_decomposition(&td, &g).unwrap();
            let views = compute_views(&tree).unwrap();
            let mut max_forgotten = 0usize;
            for (id, node) in tree.nodes().iter().enumerate() {
                if let TermNode::Forget(b, c) = node {
                    let _ = id;
                    let occupied = views[*c]
                        .slots
                        .iter()
                        .filter(|s| b.contains(&s.slot))
                        .count();
                    max_forgotten = max_forgotten.max(occupied);
                }
            }
            let table = compute_opt(&tree, &mwis_spec(), &w).unwrap();
            assert!(
                table.p_max() <= 1 << max_forgotten,
                "seed {seed}: p_max {} > 2^{max_forgotten}",
                table.p_max()
            );
        }
    }

    #[test]
    fn table_json_dump_has_cells() {
        let g = gen::path(3);
        let w = WeightVector::ones(3);
        let (_, table) = mwis_table(&g, &w);
        let parsed: serde_json::Value = serde_json::from_str(&table.to_json()).unwrap();
        assert!(parsed["p_max"].as_u64().unwrap() >= 1);
        assert!(!parsed["cells"].as_array().unwrap().is_empty());
    }
}
