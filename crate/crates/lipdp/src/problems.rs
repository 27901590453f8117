//! Hand-instantiated transition systems: maximum weight independent set,
//! minimum weight vertex cover, minimum weight dominating set, and the
//! max-ones problem on CNF incidence graphs. Also the direct constraint
//! checkers used as oracles, independent of the DP path.

use crate::dp_engine::{Direction, LeafView, SlotInfo, SourceView, State, TransitionSystem};
use crate::error::{Error, Result};
use crate::graph::{Graph, Label, VertexSet, WeightVector};

/// All submasks of `mask`, ascending.
fn submasks(mask: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(1usize << mask.count_ones().min(20));
    let mut sub = mask;
    loop {
        out.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    out.reverse();
    out
}

fn mask_vids(slots: &[SlotInfo], mask: u64) -> Vec<u32> {
    slots
        .iter()
        .filter(|s| mask & (1 << s.slot) != 0)
        .map(|s| s.vid)
        .collect()
}

// ---------------------------------------------------------------------
// Maximum weight independent set
// ---------------------------------------------------------------------

/// States are the independent subsets of the current sources; a forget
/// enumerates the committed subsets of the forgotten slots, and a
/// composition passes the state through to both sides.
pub struct MwisSpec;

pub fn mwis_spec() -> MwisSpec {
    MwisSpec
}

impl TransitionSystem for MwisSpec {
    fn name(&self) -> &'static str {
        "mwis"
    }

    fn direction(&self) -> Direction {
        Direction::Max
    }

    fn states(&self, view: &SourceView) -> Vec<State> {
        submasks(view.occupied_mask())
            .into_iter()
            .filter(|&m| !view.has_edge_within(m))
            .map(State)
            .collect()
    }

    fn leaf_feasible(&self, _leaf: &LeafView, _state: State) -> bool {
        // The listed states are already independent.
        true
    }

    fn parcom_rules(
        &self,
        left: &SourceView,
        right: &SourceView,
        state: State,
    ) -> Vec<(State, State)> {
        vec![(
            State(state.0 & left.occupied_mask()),
            State(state.0 & right.occupied_mask()),
        )]
    }

    fn forget_rules(
        &self,
        child: &SourceView,
        forgotten: &[SlotInfo],
        state: State,
    ) -> Vec<(State, Vec<u32>)> {
        let fmask = forgotten.iter().fold(0u64, |m, s| m | (1 << s.slot));
        submasks(fmask)
            .into_iter()
            .filter(|&sub| !child.has_edge_within(state.0 | sub))
            .map(|sub| (State(state.0 | sub), mask_vids(forgotten, sub)))
            .collect()
    }
}

// ---------------------------------------------------------------------
// Minimum weight vertex cover
// ---------------------------------------------------------------------

/// States mark the sources committed into the cover; an edge constant is
/// feasible only when an endpoint is marked.
pub struct MinVertexCoverSpec;

pub fn min_vertex_cover_spec() -> MinVertexCoverSpec {
    MinVertexCoverSpec
}

impl TransitionSystem for MinVertexCoverSpec {
    fn name(&self) -> &'static str {
        "vc"
    }

    fn direction(&self) -> Direction {
        Direction::Min
    }

    fn states(&self, view: &SourceView) -> Vec<State> {
        submasks(view.occupied_mask())
            .into_iter()
            .map(State)
            .collect()
    }

    fn leaf_feasible(&self, leaf: &LeafView, state: State) -> bool {
        match leaf {
            LeafView::Edge(a, b) => state.0 & ((1 << a.slot) | (1 << b.slot)) != 0,
            _ => true,
        }
    }

    fn parcom_rules(
        &self,
        left: &SourceView,
        right: &SourceView,
        state: State,
    ) -> Vec<(State, State)> {
        vec![(
            State(state.0 & left.occupied_mask()),
            State(state.0 & right.occupied_mask()),
        )]
    }

    fn forget_rules(
        &self,
        _child: &SourceView,
        forgotten: &[SlotInfo],
        state: State,
    ) -> Vec<(State, Vec<u32>)> {
        let fmask = forgotten.iter().fold(0u64, |m, s| m | (1 << s.slot));
        submasks(fmask)
            .into_iter()
            .map(|sub| (State(state.0 | sub), mask_vids(forgotten, sub)))
            .collect()
    }
}

// ---------------------------------------------------------------------
// Minimum weight dominating set
// ---------------------------------------------------------------------

const DS_IN: u64 = 1;
const DS_DOM: u64 = 2;
const DS_PEND: u64 = 3;

fn ds_code(state: State, slot: usize) -> u64 {
    (state.0 >> (2 * slot)) & 3
}

fn ds_set(state: u64, slot: usize, code: u64) -> u64 {
    state | (code << (2 * slot))
}

/// Three states per source: in the set, out and already dominated within
/// the current subgraph, or out and still pending. Domination facts enter
/// at edge constants; a pending slot may not be forgotten.
pub struct MinDominatingSetSpec;

pub fn min_dominating_set_spec() -> MinDominatingSetSpec {
    MinDominatingSetSpec
}

impl TransitionSystem for MinDominatingSetSpec {
    fn name(&self) -> &'static str {
        "ds"
    }

    fn direction(&self) -> Direction {
        Direction::Min
    }

    fn states(&self, view: &SourceView) -> Vec<State> {
        let mut out = vec![0u64];
        for s in &view.slots {
            let mut next = Vec::with_capacity(out.len() * 3);
            for state in &out {
                for code in [DS_IN, DS_DOM, DS_PEND] {
                    next.push(ds_set(*state, s.slot, code));
                }
            }
            out = next;
        }
        out.into_iter().map(State).collect()
    }

    fn leaf_feasible(&self, leaf: &LeafView, state: State) -> bool {
        match leaf {
            LeafView::Empty => true,
            // An isolated introduced vertex cannot be dominated yet.
            LeafView::Vertex(v) => ds_code(state, v.slot) != DS_DOM,
            // Exact semantics on a single edge: an endpoint is dominated
            // here if and only if the other endpoint is in the set.
            LeafView::Edge(a, b) => {
                let (ca, cb) = (ds_code(state, a.slot), ds_code(state, b.slot));
                matches!(
                    (ca, cb),
                    (DS_IN, DS_IN) | (DS_IN, DS_DOM) | (DS_DOM, DS_IN) | (DS_PEND, DS_PEND)
                )
            }
        }
    }

    fn parcom_rules(
        &self,
        left: &SourceView,
        right: &SourceView,
        state: State,
    ) -> Vec<(State, State)> {
        let lmask = left.occupied_mask();
        let rmask = right.occupied_mask();
        // Per-slot child code options (left, right), absent = 0.
        let mut options: Vec<Vec<(u64, u64)>> = Vec::new();
        let mut slots: Vec<usize> = Vec::new();
        for slot in 0..crate::dp_engine::MAX_SLOTS {
            let bit = 1u64 << slot;
            let (in_l, in_r) = (lmask & bit != 0, rmask & bit != 0);
            if !in_l && !in_r {
                continue;
            }
            let code = ds_code(state, slot);
            slots.push(slot);
            options.push(match (in_l, in_r) {
                (true, false) => vec![(code, 0)],
                (false, true) => vec![(0, code)],
                (true, true) => match code {
                    DS_IN => vec![(DS_IN, DS_IN)],
                    DS_PEND => vec![(DS_PEND, DS_PEND)],
                    // Dominated overall: dominated on at least one side.
                    DS_DOM => vec![(DS_DOM, DS_DOM), (DS_DOM, DS_PEND), (DS_PEND, DS_DOM)],
                    _ => unreachable!("occupied slot with absent code"),
                },
                (false, false) => unreachable!(),
            });
        }
        let mut rules = vec![(0u64, 0u64)];
        for (i, opts) in options.iter().enumerate() {
            let mut next = Vec::with_capacity(rules.len() * opts.len());
            for (sl, sr) in &rules {
                for (cl, cr) in opts {
                    next.push((ds_set(*sl, slots[i], *cl), ds_set(*sr, slots[i], *cr)));
                }
            }
            rules = next;
        }
        rules
            .into_iter()
            .map(|(l, r)| (State(l), State(r)))
            .collect()
    }

    fn forget_rules(
        &self,
        _child: &SourceView,
        forgotten: &[SlotInfo],
        state: State,
    ) -> Vec<(State, Vec<u32>)> {
        // A forgotten slot must be in the set or already dominated.
        let mut rules: Vec<(u64, Vec<u32>)> = vec![(state.0, Vec::new())];
        for s in forgotten {
            let mut next = Vec::with_capacity(rules.len() * 2);
            for (st, vids) in &rules {
                next.push((ds_set(*st, s.slot, DS_DOM), vids.clone()));
                let mut with_v = vids.clone();
                with_v.push(s.vid);
                next.push((ds_set(*st, s.slot, DS_IN), with_v));
            }
            rules = next;
        }
        rules
            .into_iter()
            .map(|(st, vids)| (State(st), vids))
            .collect()
    }
}

// ---------------------------------------------------------------------
// Max ones on CNF incidence graphs
// ---------------------------------------------------------------------

const SEL_BITS: u64 = 0xffff_ffff;

fn sel_bit(slot: usize) -> u64 {
    1u64 << slot
}

fn unsat_bit(slot: usize) -> u64 {
    1u64 << (32 + slot)
}

fn is_clause(info: &SlotInfo) -> bool {
    matches!(info.label, Some(Label::Clause(_)))
}

fn is_literal(info: &SlotInfo) -> bool {
    matches!(
        info.label,
        Some(Label::Variable(_)) | Some(Label::NegVariable(_))
    )
}

/// State per node: the set of literal sources selected (variable vertices
/// chosen true, negation vertices chosen false) and the set of clause
/// sources still unsatisfied within the current subgraph. Truth totality
/// and consistency are enforced by the variable-negation edge constants;
/// clause satisfaction enters at clause-literal edge constants.
pub struct MaxOnesSpec;

pub fn max_ones_spec() -> MaxOnesSpec {
    MaxOnesSpec
}

impl TransitionSystem for MaxOnesSpec {
    fn name(&self) -> &'static str {
        "maxones"
    }

    fn direction(&self) -> Direction {
        Direction::Max
    }

    fn states(&self, view: &SourceView) -> Vec<State> {
        let lit_mask: u64 = view
            .slots
            .iter()
            .filter(|s| is_literal(s))
            .fold(0, |m, s| m | sel_bit(s.slot));
        let clause_mask: u64 = view
            .slots
            .iter()
            .filter(|s| is_clause(s))
            .fold(0, |m, s| m | sel_bit(s.slot));
        let mut out = Vec::new();
        for sel in submasks(lit_mask) {
            for unsat in submasks(clause_mask) {
                out.push(State(sel | (unsat << 32)));
            }
        }
        out
    }

    fn check_leaf(&self, leaf: &LeafView) -> Result<()> {
        match leaf {
            LeafView::Empty => Ok(()),
            LeafView::Vertex(v) => {
                if v.label.is_none() {
                    Err(Error::contract(format!(
                        "max-ones vertex {} lacks a label",
                        v.vid
                    )))
                } else {
                    Ok(())
                }
            }
            LeafView::Edge(a, b) => match (a.label, b.label) {
                (Some(Label::Variable(i)), Some(Label::NegVariable(j)))
                | (Some(Label::NegVariable(j)), Some(Label::Variable(i)))
                    if i == j =>
                {
                    Ok(())
                }
                (Some(Label::Clause(_)), Some(Label::Variable(_)))
                | (Some(Label::Clause(_)), Some(Label::NegVariable(_)))
                | (Some(Label::Variable(_)), Some(Label::Clause(_)))
                | (Some(Label::NegVariable(_)), Some(Label::Clause(_))) => Ok(()),
                _ => Err(Error::contract(format!(
                    "edge ({}, {}) is not an incidence-graph edge",
                    a.vid, b.vid
                ))),
            },
        }
    }

    fn leaf_feasible(&self, leaf: &LeafView, state: State) -> bool {
        match leaf {
            LeafView::Empty => true,
            LeafView::Vertex(v) => {
                if is_clause(v) {
                    // No adjacent literal in a one-vertex graph.
                    state.0 & unsat_bit(v.slot) != 0
                } else {
                    true
                }
            }
            LeafView::Edge(a, b) => {
                let (c, l) = if is_clause(a) {
                    (Some(a), b)
                } else if is_clause(b) {
                    (Some(b), a)
                } else {
                    (None, a)
                };
                match c {
                    // Clause-literal edge: unsatisfied exactly when the
                    // literal is not selected.
                    Some(c) => {
                        let selected = state.0 & sel_bit(l.slot) != 0;
                        let unsat = state.0 & unsat_bit(c.slot) != 0;
                        unsat == !selected
                    }
                    // Variable-negation edge: exactly one side selected.
                    None => {
                        let sa = state.0 & sel_bit(a.slot) != 0;
                        let sb = state.0 & sel_bit(b.slot) != 0;
                        sa ^ sb
                    }
                }
            }
        }
    }

    fn parcom_rules(
        &self,
        left: &SourceView,
        right: &SourceView,
        state: State,
    ) -> Vec<(State, State)> {
        let lmask = left.occupied_mask();
        let rmask = right.occupied_mask();
        let sel = state.0 & SEL_BITS;
        // Clause slots: a shared clause is unsatisfied overall iff
        // unsatisfied on both sides; the disjoint split of "satisfied"
        // is (sat, sat), (sat, unsat), (unsat, sat).
        let mut rules = vec![(sel & lmask, sel & rmask)];
        for slot in 0..crate::dp_engine::MAX_SLOTS {
            let bit = 1u64 << slot;
            let (in_l, in_r) = (lmask & bit != 0, rmask & bit != 0);
            let info = if in_l {
                left.slot_info(slot)
            } else {
                right.slot_info(slot)
            };
            let Some(info) = info else { continue };
            if !is_clause(info) {
                continue;
            }
            let unsat = state.0 & unsat_bit(slot) != 0;
            let combos: &[(bool, bool)] = match (in_l, in_r, unsat) {
                (true, true, true) => &[(true, true)],
                (true, true, false) => &[(false, false), (false, true), (true, false)],
                (true, false, u) => {
                    if u {
                        &[(true, false)]
                    } else {
                        &[(false, false)]
                    }
                }
                (false, true, u) => {
                    if u {
                        &[(false, true)]
                    } else {
                        &[(false, false)]
                    }
                }
                (false, false, _) => continue,
            };
            let mut next = Vec::with_capacity(rules.len() * combos.len());
            for (sl, sr) in &rules {
                for &(ul, ur) in combos {
                    let nl = sl | if ul && in_l { unsat_bit(slot) } else { 0 };
                    let nr = sr | if ur && in_r { unsat_bit(slot) } else { 0 };
                    next.push((nl, nr));
                }
            }
            rules = next;
        }
        rules
            .into_iter()
            .map(|(l, r)| (State(l), State(r)))
            .collect()
    }

    fn forget_rules(
        &self,
        _child: &SourceView,
        forgotten: &[SlotInfo],
        state: State,
    ) -> Vec<(State, Vec<u32>)> {
        // Literal slots branch on selection; a clause slot may only be
        // forgotten once satisfied.
        let mut rules: Vec<(u64, Vec<u32>)> = vec![(state.0, Vec::new())];
        for s in forgotten {
            if is_clause(s) {
                continue; // unsat bit stays 0: satisfied
            }
            let mut next = Vec::with_capacity(rules.len() * 2);
            for (st, vids) in &rules {
                next.push((*st, vids.clone()));
                let mut with_v = vids.clone();
                if matches!(s.label, Some(Label::Variable(_))) {
                    with_v.push(s.vid);
                }
                next.push((st | sel_bit(s.slot), with_v));
            }
            rules = next;
        }
        rules
            .into_iter()
            .map(|(st, vids)| (State(st), vids))
            .collect()
    }
}

// ---------------------------------------------------------------------
// Problem registry and oracle checkers
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Mwis,
    MinVertexCover,
    MinDominatingSet,
    MaxOnes,
}

impl Problem {
    pub fn from_name(name: &str) -> Option<Problem> {
        match name {
            "mwis" => Some(Problem::Mwis),
            "vc" => Some(Problem::MinVertexCover),
            "ds" => Some(Problem::MinDominatingSet),
            "maxones" => Some(Problem::MaxOnes),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Mwis => "mwis",
            Problem::MinVertexCover => "vc",
            Problem::MinDominatingSet => "ds",
            Problem::MaxOnes => "maxones",
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Problem::Mwis | Problem::MaxOnes => Direction::Max,
            Problem::MinVertexCover | Problem::MinDominatingSet => Direction::Min,
        }
    }

    pub fn spec(&self) -> Box<dyn TransitionSystem> {
        match self {
            Problem::Mwis => Box::new(mwis_spec()),
            Problem::MinVertexCover => Box::new(min_vertex_cover_spec()),
            Problem::MinDominatingSet => Box::new(min_dominating_set_spec()),
            Problem::MaxOnes => Box::new(max_ones_spec()),
        }
    }

    /// Vertices allowed in a solution: for max-ones only variable vertices,
    /// otherwise all of them.
    pub fn solution_support(&self, g: &Graph) -> Vec<usize> {
        match self {
            Problem::MaxOnes => (0..g.n())
                .filter(|&v| matches!(g.label(v), Some(Label::Variable(_))))
                .collect(),
            _ => (0..g.n()).collect(),
        }
    }

    /// Checks the defining property of a solution directly on the graph.
    pub fn validate_solution(&self, g: &Graph, x: &VertexSet) -> bool {
        if x.iter().any(|v| v >= g.n()) {
            return false;
        }
        match self {
            Problem::Mwis => !g
                .edges()
                .iter()
                .any(|&(a, b)| x.contains(a) && x.contains(b)),
            Problem::MinVertexCover => g
                .edges()
                .iter()
                .all(|&(a, b)| x.contains(a) || x.contains(b)),
            Problem::MinDominatingSet => {
                (0..g.n()).all(|v| x.contains(v) || g.neighbors(v).iter().any(|&u| x.contains(u)))
            }
            Problem::MaxOnes => {
                let Some(labels) = g.labels() else {
                    return false;
                };
                if x.iter().any(|v| !matches!(labels[v], Label::Variable(_))) {
                    return false;
                }
                // Variable i is true iff its vertex is chosen; every
                // clause needs a satisfied literal among its neighbors.
                let truth = |v: usize| -> Option<bool> {
                    match labels[v] {
                        Label::Variable(_) => Some(x.contains(v)),
                        Label::NegVariable(i) => {
                            let var_vertex =
                                (0..g.n()).find(|&u| labels[u] == Label::Variable(i))?;
                            Some(!x.contains(var_vertex))
                        }
                        Label::Clause(_) => None,
                    }
                };
                (0..g.n()).all(|v| match labels[v] {
                    Label::Clause(_) => g.neighbors(v).iter().any(|&u| truth(u) == Some(true)),
                    _ => true,
                })
            }
        }
    }
}

// ---------------------------------------------------------------------
// CNF instances and incidence graphs
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

pub type Clause = Vec<Literal>;

/// A 3CNF instance for the max-ones problem.
#[derive(Debug, Clone)]
pub struct MaxOnesInstance {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl MaxOnesInstance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        let mut cleaned = Vec::with_capacity(clauses.len());
        for (j, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::invalid(format!("clause {j} is empty")));
            }
            if clause.len() > 3 {
                return Err(Error::invalid(format!(
                    "clause {j} has {} literals, at most 3 allowed",
                    clause.len()
                )));
            }
            for lit in &clause {
                if lit.var >= num_vars {
                    return Err(Error::invalid(format!(
                        "clause {j} references variable {} out of range",
                        lit.var
                    )));
                }
            }
            let mut c = clause;
            c.sort_by_key(|l| (l.var, l.negated));
            c.dedup();
            cleaned.push(c);
        }
        Ok(MaxOnesInstance {
            num_vars,
            clauses: cleaned,
        })
    }

    /// Parses DIMACS CNF: a `p cnf <vars> <clauses>` header, then clauses
    /// as integer literals terminated by 0. `c` lines are comments.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut num_vars = None;
        let mut num_clauses = 0usize;
        let mut ints: Vec<i64> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::parse(format!("bad problem line: {line}")));
                }
                num_vars = Some(
                    parts[1]
                        .parse::<usize>()
                        .map_err(|e| Error::parse(format!("{e}")))?,
                );
                num_clauses = parts[2].parse().map_err(|e| Error::parse(format!("{e}")))?;
                continue;
            }
            for tok in line.split_whitespace() {
                ints.push(
                    tok.parse()
                        .map_err(|e| Error::parse(format!("literal: {e}")))?,
                );
            }
        }
        let num_vars = num_vars.ok_or_else(|| Error::parse("missing p cnf header"))?;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for v in ints {
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = v.unsigned_abs() as usize - 1;
                current.push(Literal {
                    var,
                    negated: v < 0,
                });
            }
        }
        if !current.is_empty() {
            return Err(Error::parse("last clause not terminated by 0"));
        }
        if clauses.len() != num_clauses {
            return Err(Error::parse(format!(
                "header declares {num_clauses} clauses, found {}",
                clauses.len()
            )));
        }
        MaxOnesInstance::new(num_vars, clauses)
    }

    /// True when the assignment satisfies every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment[l.var] != l.negated))
    }
}

/// The incidence graph of a CNF instance: variable vertices `0..V`,
/// negation vertices `V..2V`, clause vertices `2V..2V+C`. Each variable is
/// joined to its negation; a clause is joined to the vertex of each of its
/// literals. Weights extend the variable weights by zeros.
pub fn build_incidence_graph(
    inst: &MaxOnesInstance,
    w: &WeightVector,
) -> Result<(Graph, WeightVector)> {
    if w.len() != inst.num_vars {
        return Err(Error::invalid(format!(
            "expected {} variable weights, got {}",
            inst.num_vars,
            w.len()
        )));
    }
    let v = inst.num_vars;
    let n = 2 * v + inst.clauses.len();
    let mut edges = Vec::new();
    for i in 0..v {
        edges.push((i, v + i));
    }
    for (j, clause) in inst.clauses.iter().enumerate() {
        let cj = 2 * v + j;
        for lit in clause {
            edges.push((cj, if lit.negated { v + lit.var } else { lit.var }));
        }
    }
    let mut labels = Vec::with_capacity(n);
    labels.extend((0..v).map(|i| Label::Variable(i as u32)));
    labels.extend((0..v).map(|i| Label::NegVariable(i as u32)));
    labels.extend((0..inst.clauses.len()).map(|j| Label::Clause(j as u32)));
    let g = Graph::new(n, &edges)?.with_labels(labels)?;
    let mut weights = w.as_slice().to_vec();
    weights.resize(n, 0.0);
    Ok((g, WeightVector::new(weights)?))
}
