//! Deterministic fixture generators: standard graph families, random
//! graphs and trees, dyadic random weights, and random 3CNF instances.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexSet, WeightVector};
use crate::problems::{Clause, Literal, MaxOnesInstance};
use crate::tree_decomp::TreeDecomposition;

pub fn path(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    edges.push((n - 1, 0));
    Graph::new(n, &edges).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    Graph::new(n, &edges).unwrap()
}

pub fn star(leaves: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::new(leaves + 1, &edges).unwrap()
}

/// r-by-c grid; vertex (i, j) has id `i * c + j`.
pub fn grid(r: usize, c: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..r {
        for j in 0..c {
            let v = i * c + j;
            if j + 1 < c {
                edges.push((v, v + 1));
            }
            if i + 1 < r {
                edges.push((v, v + c));
            }
        }
    }
    Graph::new(r * c, &edges).unwrap()
}

/// Uniform random labeled tree (random parent among earlier vertices).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let p = rng.random_range(0..v);
        edges.push((p, v));
    }
    Graph::new(n, &edges).unwrap()
}

/// Connected random graph: a random tree plus extra random edges up to
/// roughly `m` edges total.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut have = std::collections::BTreeSet::new();
    for v in 1..n {
        let p = rng.random_range(0..v);
        edges.push((p, v));
        have.insert((p.min(v), p.max(v)));
    }
    let mut attempts = 0;
    while edges.len() < m && attempts < 20 * m && n >= 2 {
        attempts += 1;
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let e = (a.min(b), a.max(b));
        if have.insert(e) {
            edges.push(e);
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Random weights on the dyadic grid `{0, 1/1024, ..., 10}`. Sums of up to
/// a few thousand such weights are exact in f64 under any summation order,
/// which keeps oracle comparisons exact.
pub fn dyadic_weights(n: usize, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1b5_4a32_d192_ed03);
    let w: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..=10240) as f64 / 1024.0)
        .collect();
    WeightVector::new(w).unwrap()
}

/// Strictly positive dyadic weights in `[1/1024, 10]`.
pub fn positive_dyadic_weights(n: usize, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x94d0_49bb_1331_11eb);
    let w: Vec<f64> = (0..n)
        .map(|_| rng.random_range(1..=10240) as f64 / 1024.0)
        .collect();
    WeightVector::new(w).unwrap()
}

/// The width-1 path decomposition of a path graph: bag i = {i, i+1}.
pub fn path_decomposition(g: &Graph) -> TreeDecomposition {
    let n = g.n();
    assert!(n >= 2);
    let bags: Vec<VertexSet> = (0..n - 1)
        .map(|i| VertexSet::from_iter([i, i + 1]))
        .collect();
    let parent: Vec<Option<usize>> = (0..n - 1)
        .map(|i| if i == 0 { None } else { Some(i - 1) })
        .collect();
    TreeDecomposition::new(bags, parent).unwrap()
}

/// Width-1 decomposition of a tree: one bag per edge, rooted at vertex 0's
/// first edge; bag order follows a BFS of the tree.
pub fn tree_decomposition_of_tree(g: &Graph) -> TreeDecomposition {
    let n = g.n();
    assert!(n >= 2);
    let mut parent_vertex = vec![usize::MAX; n];
    let mut order = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut qi = 0;
    while qi < order.len() {
        let v = order[qi];
        qi += 1;
        for &u in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                parent_vertex[u] = v;
                order.push(u);
            }
        }
    }
    assert_eq!(order.len(), n, "graph must be a connected tree");
    // Bag for vertex v (v != root) covers edge {v, parent(v)}.
    let mut bag_index = vec![usize::MAX; n];
    let mut bags = Vec::new();
    let mut parents = Vec::new();
    for &v in order.iter().skip(1) {
        bag_index[v] = bags.len();
        bags.push(VertexSet::from_iter([v, parent_vertex[v]]));
        let pv = parent_vertex[v];
        parents.push(if pv == 0 && bag_index[pv] == usize::MAX {
            if bags.len() == 1 {
                None
            } else {
                Some(0)
            }
        } else {
            Some(bag_index[pv])
        });
    }
    TreeDecomposition::new(bags, parents).unwrap()
}

/// Path decomposition of an r-by-c grid from consecutive column pairs:
/// bag j covers columns j and j+1, width 2r-1.
pub fn grid_decomposition(r: usize, c: usize) -> TreeDecomposition {
    assert!(r >= 1 && c >= 1);
    let column = |j: usize| (0..r).map(move |i| i * c + j);
    if c == 1 {
        return TreeDecomposition::new(vec![VertexSet::from_iter(column(0))], vec![None]).unwrap();
    }
    let bags: Vec<VertexSet> = (0..c - 1)
        .map(|j| VertexSet::from_iter(column(j).chain(column(j + 1))))
        .collect();
    let parent: Vec<Option<usize>> = (0..c - 1)
        .map(|j| if j == 0 { None } else { Some(j - 1) })
        .collect();
    TreeDecomposition::new(bags, parent).unwrap()
}

/// Random 3CNF with `vars` variables and `clauses` clauses of 1..=3
/// distinct variables each.
pub fn random_cnf(vars: usize, clauses: usize, seed: u64) -> MaxOnesInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbf58_476d_1ce4_e5b9);
    let mut out = Vec::with_capacity(clauses);
    for _ in 0..clauses {
        let len = rng.random_range(1..=3usize.min(vars));
        let mut vs: Vec<usize> = (0..vars).collect();
        vs.shuffle(&mut rng);
        let clause: Clause = vs[..len]
            .iter()
            .map(|&v| Literal {
                var: v,
                negated: rng.random_bool(0.5),
            })
            .collect();
        out.push(clause);
    }
    MaxOnesInstance::new(vars, out).unwrap()
}
