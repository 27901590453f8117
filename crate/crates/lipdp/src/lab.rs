//! Brute-force oracles and the empirical stability laboratory: coupled
//! and optimal-transport estimates of the earth mover's distance between
//! output distributions, per-vertex perturbation sweeps against the
//! theoretical stability line, and approximation sweeps.
//!
//! The earth mover's distance is an infimum over couplings, so neither
//! estimate here is exact: the shared-seed coupling gives an upper bound,
//! and the optimal transport between two empirical distributions is an
//! estimate from samples. The reports keep the two separate.

use rayon::prelude::*;

use crate::dp_engine::{Direction, ExtractConfig};
use crate::error::{Error, Result};
use crate::graph::{weighted_hamming, Graph, VertexSet, WeightVector};
use crate::pipeline::Pipeline;
use crate::problems::Problem;
use crate::soft_select::substream;

/// Enumeration guard for the brute-force oracle.
pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Exhaustive optimum over all subsets of the solution support, checked
/// with the direct constraint validators; `(None, None)` when no subset is
/// feasible.
pub fn brute_force_opt(
    g: &Graph,
    w: &WeightVector,
    problem: Problem,
) -> Result<(Option<f64>, Option<VertexSet>)> {
    let support = problem.solution_support(g);
    if support.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n: support.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(f64, VertexSet)> = None;
    for mask in 0u64..(1u64 << support.len()) {
        let x = VertexSet::from_iter(
            support
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v),
        );
        if !problem.validate_solution(g, &x) {
            continue;
        }
        let val = w.weight_of(&x);
        let improves = match (&best, problem.direction()) {
            (None, _) => true,
            (Some((b, _)), Direction::Max) => val > *b,
            (Some((b, _)), Direction::Min) => val < *b,
        };
        if improves {
            best = Some((val, x));
        }
    }
    Ok(match best {
        Some((v, x)) => (Some(v), Some(x)),
        None => (None, None),
    })
}

/// Exact optimum via the DP pipeline (no enumeration limit; cost is
/// exponential in the achieved width instead).
pub fn exact_opt(g: &Graph, problem: Problem, w: &WeightVector) -> Result<Option<f64>> {
    Ok(Pipeline::build(g, problem)?.table(w)?.root_opt())
}

/// Mean and standard error of a sample.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmMode {
    /// Shared-seed coupling: an upper bound on EM up to sampling error.
    Coupled,
    /// Exact min-cost transport between the two empirical distributions.
    Transport,
}

#[derive(Debug, Clone, Copy)]
pub struct EmEstimate {
    pub em: f64,
    /// Standard error of the per-seed distances (coupled mode only; zero
    /// in transport mode).
    pub se: f64,
    pub n_runs: usize,
}

/// Estimates the earth mover's distance between the outputs of two
/// samplers. Seeds are derived from `master_seed`, identical for both
/// samplers, which realizes the common-random-number coupling.
pub fn estimate_em(
    run_a: &(dyn Fn(u64) -> VertexSet + Sync),
    run_b: &(dyn Fn(u64) -> VertexSet + Sync),
    w_a: &WeightVector,
    w_b: &WeightVector,
    n_runs: usize,
    mode: EmMode,
    master_seed: u64,
) -> Result<EmEstimate> {
    let seeds: Vec<u64> = (0..n_runs)
        .map(|i| substream(master_seed, 2, i as u64))
        .collect();
    match mode {
        EmMode::Coupled => {
            let dists: Result<Vec<f64>> = seeds
                .par_iter()
                .map(|&s| weighted_hamming(&run_a(s), w_a, &run_b(s), w_b))
                .collect();
            let dists = dists?;
            let (em, se) = mean_se(&dists);
            Ok(EmEstimate { em, se, n_runs })
        }
        EmMode::Transport => {
            let collect = |run: &(dyn Fn(u64) -> VertexSet + Sync)| {
                let mut counts: std::collections::BTreeMap<VertexSet, u64> = Default::default();
                for &s in &seeds {
                    *counts.entry(run(s)).or_insert(0) += 1;
                }
                counts.into_iter().collect::<Vec<_>>()
            };
            let a = collect(run_a);
            let b = collect(run_b);
            let cost = |i: usize, j: usize| {
                weighted_hamming(&a[i].0, w_a, &b[j].0, w_b).expect("equal-length weights")
            };
            let mass_a: Vec<u64> = a.iter().map(|(_, c)| *c).collect();
            let mass_b: Vec<u64> = b.iter().map(|(_, c)| *c).collect();
            let total = min_cost_transport(&mass_a, &mass_b, &cost);
            Ok(EmEstimate {
                em: total / n_runs as f64,
                se: 0.0,
                n_runs,
            })
        }
    }
}

/// Exact transportation cost between two integer mass vectors via
/// successive shortest paths with Bellman-Ford search. Masses must sum to
/// the same total; costs must be finite.
pub fn min_cost_transport(
    mass_a: &[u64],
    mass_b: &[u64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    assert_eq!(
        mass_a.iter().sum::<u64>(),
        mass_b.iter().sum::<u64>(),
        "transport requires equal total mass"
    );
    let (p, q) = (mass_a.len(), mass_b.len());
    // Node layout: source, P supply nodes, Q demand nodes, sink.
    let nodes = p + q + 2;
    let (src, sink) = (0usize, nodes - 1);
    struct Arc {
        to: usize,
        cap: u64,
        cost: f64,
        rev: usize,
    }
    let mut adj: Vec<Vec<Arc>> = (0..nodes).map(|_| Vec::new()).collect();
    let add = |adj: &mut Vec<Vec<Arc>>, from: usize, to: usize, cap: u64, cost: f64| {
        let rev_from = adj[to].len();
        let rev_to = adj[from].len();
        adj[from].push(Arc {
            to,
            cap,
            cost,
            rev: rev_from,
        });
        adj[to].push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
            rev: rev_to,
        });
    };
    for (i, &m) in mass_a.iter().enumerate() {
        add(&mut adj, src, 1 + i, m, 0.0);
    }
    for (j, &m) in mass_b.iter().enumerate() {
        add(&mut adj, 1 + p + j, sink, m, 0.0);
    }
    for i in 0..p {
        for j in 0..q {
            add(&mut adj, 1 + i, 1 + p + j, u64::MAX / 4, cost(i, j));
        }
    }
    let mut total_cost = 0.0;
    loop {
        // Bellman-Ford shortest path from src on residual capacities.
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        dist[src] = 0.0;
        let mut updated = true;
        while updated {
            updated = false;
            for u in 0..nodes {
                if !dist[u].is_finite() {
                    continue;
                }
                for (k, arc) in adj[u].iter().enumerate() {
                    if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-15 {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev[arc.to] = Some((u, k));
                        updated = true;
                    }
                }
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        let mut bottleneck = u64::MAX;
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            bottleneck = bottleneck.min(adj[u][k].cap);
            v = u;
        }
        if bottleneck == 0 || bottleneck == u64::MAX {
            break;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            adj[u][k].cap -= bottleneck;
            let rev = adj[u][k].rev;
            let to = adj[u][k].to;
            adj[to][rev].cap += bottleneck;
            total_cost += adj[u][k].cost * bottleneck as f64;
            v = u;
        }
    }
    total_cost
}

/// One row of a stability sweep: vertex `u` perturbed by `delta`.
#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub u: usize,
    pub delta: f64,
    pub em_coupled: f64,
    pub se_coupled: f64,
    /// Present on instances small enough for the transport estimate.
    pub em_ot: Option<f64>,
    pub em_per_delta: f64,
    pub n_runs: usize,
    pub theory_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub eps_total: f64,
    pub n_runs: usize,
    /// Explicit perturbation sizes; default is {1e-3, 1e-2, 1e-1} times
    /// the smallest positive table value, which also acts as the clamp.
    pub delta_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub with_transport: bool,
    /// Use hard selectors (the non-stable reference algorithm).
    pub hard: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            eps_total: 0.5,
            n_runs: 200,
            delta_grid: None,
            seed: 1,
            with_transport: false,
            hard: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LipschitzSweep {
    pub reports: Vec<CouplingReport>,
    pub max_em_per_delta: f64,
    /// The stability line `31 h eps^-1 ln(2 p_max eps^-1)` for
    /// maximization; for minimization the reported reference line carries
    /// the extra `(1 + eps)^h` factor.
    pub theory_bound: f64,
    pub eps_node: f64,
    pub p_max: usize,
    pub term_height: usize,
    pub min_positive_opt: Option<f64>,
}

/// The stability reference line for the given parameters.
pub fn stability_line(direction: Direction, height: usize, eps_node: f64, p_max: usize) -> f64 {
    let h = height as f64;
    let base = 31.0 * h / eps_node * (2.0 * p_max.max(1) as f64 / eps_node).ln();
    match direction {
        Direction::Max => base,
        Direction::Min => base * (1.0 + eps_node).powf(h),
    }
}

/// Per-vertex perturbation sweep: for every `u` and every `delta` in the
/// grid, estimates EM between the output distributions under `w` and
/// `w + delta . 1_u` with the shared-seed coupling (and optionally the
/// transport estimate), normalized by `delta`.
pub fn lipschitz_sweep(
    g: &Graph,
    w: &WeightVector,
    problem: Problem,
    opts: &SweepOptions,
) -> Result<LipschitzSweep> {
    let pipeline = Pipeline::build(g, problem)?;
    let table = pipeline.table(w)?;
    if table.root_opt().is_none() {
        return Err(Error::Infeasible {
            state: format!("{}@root", problem.name()),
        });
    }
    let eps_node = pipeline.epsilon_per_node(opts.eps_total)?;
    let min_pos = table.min_positive_opt();
    let clamp = min_pos.unwrap_or(1.0);
    let grid: Vec<f64> = match &opts.delta_grid {
        Some(g) => g
            .iter()
            .map(|&d| d.min(clamp))
            .filter(|&d| d > 0.0)
            .collect(),
        None => [1e-3, 1e-2, 1e-1].iter().map(|f| f * clamp).collect(),
    };
    let theory = stability_line(
        problem.direction(),
        pipeline.tree.height(),
        eps_node,
        table.p_max(),
    );

    let cells: Vec<(usize, f64)> = (0..g.n())
        .flat_map(|u| grid.iter().map(move |&d| (u, d)))
        .collect();
    let reports: Result<Vec<CouplingReport>> = cells
        .par_iter()
        .map(|&(u, delta)| {
            let w2 = w.perturb(u, delta)?;
            let table2 = pipeline.table(&w2)?;
            let cfg_of = |seed: u64| {
                if opts.hard {
                    ExtractConfig::hard()
                } else {
                    ExtractConfig::soft(eps_node, seed)
                }
            };
            let run_a = |seed: u64| {
                pipeline
                    .extract(w, &table, &cfg_of(seed))
                    .expect("feasible")
            };
            let run_b = |seed: u64| {
                pipeline
                    .extract(&w2, &table2, &cfg_of(seed))
                    .expect("feasible")
            };
            let n_runs = if opts.hard { 1 } else { opts.n_runs };
            let coupled = estimate_em(&run_a, &run_b, w, &w2, n_runs, EmMode::Coupled, opts.seed)?;
            let em_ot = if opts.with_transport {
                Some(estimate_em(&run_a, &run_b, w, &w2, n_runs, EmMode::Transport, opts.seed)?.em)
            } else {
                None
            };
            Ok(CouplingReport {
                u,
                delta,
                em_coupled: coupled.em,
                se_coupled: coupled.se,
                em_ot,
                em_per_delta: coupled.em / delta,
                n_runs,
                theory_bound: theory,
            })
        })
        .collect();
    let reports = reports?;
    let max_em_per_delta = reports.iter().map(|r| r.em_per_delta).fold(0.0, f64::max);
    Ok(LipschitzSweep {
        reports,
        max_em_per_delta,
        theory_bound: theory,
        eps_node,
        p_max: table.p_max(),
        term_height: pipeline.tree.height(),
        min_positive_opt: min_pos,
    })
}

#[derive(Debug, Clone)]
pub struct ApproxReport {
    pub opt: f64,
    pub mean: f64,
    pub se: f64,
    /// `(1 - eps) * opt` for maximization, `(1 + eps) * opt` for
    /// minimization.
    pub target: f64,
    pub n_runs: usize,
    pub holds: bool,
}

/// Replicated randomized solves against the exact optimum.
pub fn approx_sweep(
    g: &Graph,
    w: &WeightVector,
    problem: Problem,
    eps_total: f64,
    n_runs: usize,
    seed: u64,
) -> Result<ApproxReport> {
    let pipeline = Pipeline::build(g, problem)?;
    let table = pipeline.table(w)?;
    let Some(opt) = table.root_opt() else {
        return Err(Error::Infeasible {
            state: format!("{}@root", problem.name()),
        });
    };
    let eps_node = pipeline.epsilon_per_node(eps_total)?;
    let weights: Result<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let cfg = ExtractConfig::soft(eps_node, substream(seed, 3, i as u64));
            Ok(w.weight_of(&pipeline.extract(w, &table, &cfg)?))
        })
        .collect();
    let weights = weights?;
    let (mean, se) = mean_se(&weights);
    let (target, holds) = match problem.direction() {
        Direction::Max => (
            (1.0 - eps_total) * opt,
            mean >= (1.0 - eps_total) * opt - 3.0 * se,
        ),
        Direction::Min => (
            (1.0 + eps_total) * opt,
            mean <= (1.0 + eps_total) * opt + 3.0 * se,
        ),
    };
    Ok(ApproxReport {
        opt,
        mean,
        se,
        target,
        n_runs,
        holds,
    })
}

/// The tie family witnessing non-stability of hard selection: a path on
/// `2k+1` vertices whose even class (weight `k` each, k+1 vertices) and
/// odd class (weight `k+1` each, k vertices) have equal total weight, so
/// an infinitesimal bump to the middle vertex flips the deterministic
/// argmax between two solutions that disagree everywhere.
pub fn tie_instance(k: usize) -> (Graph, WeightVector, usize) {
    assert!(k >= 1);
    let n = 2 * k + 1;
    let g = crate::gen::path(n);
    let w: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { k as f64 } else { k as f64 + 1.0 })
        .collect();
    (g, WeightVector::new(w).unwrap(), k)
}

/// Coupled EM per delta of the hard-selector DP on the tie instance,
/// perturbing the middle vertex.
pub fn hard_tie_em_per_delta(k: usize, delta: f64) -> Result<f64> {
    let (g, w, middle) = tie_instance(k);
    let pipeline = Pipeline::build(&g, Problem::Mwis)?;
    let table = pipeline.table(&w)?;
    let w2 = w.perturb(middle, delta)?;
    let table2 = pipeline.table(&w2)?;
    let x1 = pipeline.extract(&w, &table, &ExtractConfig::hard())?;
    let x2 = pipeline.extract(&w2, &table2, &ExtractConfig::hard())?;
    Ok(weighted_hamming(&x1, &w, &x2, &w2)? / delta)
}
