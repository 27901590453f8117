//! Property-based invariants: distance axioms, BFS layering, balance
//! contracts, parse-tree round trips, and DP-versus-brute-force equality
//! on small random instances.

use proptest::prelude::*;

use lipdp::dp_engine::ExtractConfig;
use lipdp::gen;
use lipdp::graph::{bfs_layers, weighted_hamming, VertexSet, WeightVector};
use lipdp::hr_algebra::{ParseTree, TERM_HEIGHT_C};
use lipdp::lab::brute_force_opt;
use lipdp::pipeline::Pipeline;
use lipdp::problems::{build_incidence_graph, Problem};
use lipdp::tree_decomp::{balance, decompose_heuristic, validate};

fn weights_strategy(n: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0u32..=10240, n).prop_map(|v| {
        WeightVector::new(v.into_iter().map(|x| x as f64 / 1024.0).collect()).unwrap()
    })
}

fn set_strategy(n: usize) -> impl Strategy<Value = VertexSet> {
    prop::collection::btree_set(0..n, 0..=n).prop_map(VertexSet::from_iter)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamming_symmetry_and_zero(
        x1 in set_strategy(6),
        x2 in set_strategy(6),
        w1 in weights_strategy(6),
        w2 in weights_strategy(6),
    ) {
        let d12 = weighted_hamming(&x1, &w1, &x2, &w2).unwrap();
        let d21 = weighted_hamming(&x2, &w2, &x1, &w1).unwrap();
        prop_assert_eq!(d12, d21);
        prop_assert!(d12 >= 0.0);
        // Zero exactly when the weighted indicators agree on the union.
        let coincide = (0..6).all(|v| {
            let a = if x1.contains(v) { w1[v] } else { 0.0 };
            let b = if x2.contains(v) { w2[v] } else { 0.0 };
            a == b
        });
        prop_assert_eq!(d12 == 0.0, coincide);
    }

    #[test]
    fn hamming_same_set_bounded_by_l1(
        x in set_strategy(6),
        w1 in weights_strategy(6),
        w2 in weights_strategy(6),
    ) {
        let d = weighted_hamming(&x, &w1, &x, &w2).unwrap();
        let restricted: f64 = x.iter().map(|v| (w1[v] - w2[v]).abs()).sum();
        let l1 = w1.l1_distance(&w2);
        prop_assert!((d - restricted).abs() < 1e-12);
        prop_assert!(d <= l1 + 1e-12);
    }

    #[test]
    fn perturb_l1_is_delta(
        w in weights_strategy(8),
        u in 0usize..8,
        delta in 0.0f64..5.0,
    ) {
        let w2 = w.perturb(u, delta).unwrap();
        prop_assert!((w.l1_distance(&w2) - delta).abs() < 1e-12);
    }

    #[test]
    fn bfs_layers_partition_and_edges(seed in any::<u64>(), n in 2usize..12, extra in 0usize..8) {
        let g = gen::random_graph(n, n - 1 + extra, seed);
        let layers = bfs_layers(&g, 0).unwrap();
        // Partition of the vertex set.
        let mut count = vec![0usize; n];
        for layer in &layers {
            for v in layer.iter() {
                count[v] += 1;
            }
        }
        prop_assert!(count.iter().all(|&c| c == 1));
        // Every edge joins same or adjacent layers (the overflow layer is
        // only reachable from itself; random_graph output is connected).
        let layer_of = |v: usize| layers.iter().position(|l| l.contains(v)).unwrap();
        for &(a, b) in g.edges() {
            let (la, lb) = (layer_of(a), layer_of(b));
            prop_assert!(la.abs_diff(lb) <= 1, "edge ({a},{b}) spans layers {la},{lb}");
        }
    }

    #[test]
    fn balance_contract(seed in any::<u64>(), n in 1usize..14, extra in 0usize..10) {
        let g = gen::random_graph(n, n.saturating_sub(1) + extra, seed);
        let td = decompose_heuristic(&g);
        prop_assert!(validate(&td, &g).is_valid());
        let b = balance(&td).unwrap();
        prop_assert!(validate(&b, &g).is_valid());
        prop_assert!(b.is_binary());
        prop_assert!(b.width() <= 3 * td.width() + 2);
    }

    #[test]
    fn parse_tree_round_trip(seed in any::<u64>(), n in 1usize..12, extra in 0usize..8) {
        let g = gen::random_graph(n, n.saturating_sub(1) + extra, seed);
        let td = balance(&decompose_heuristic(&g)).unwrap();
        let tree = ParseTree::from_decomposition(&td, &g).unwrap();
        let kg = tree.eval().unwrap();
        prop_assert!(kg.matches(&g));
        prop_assert!(kg.sources().is_empty());
        let bound = TERM_HEIGHT_C * ((td.width() as f64 + 2.0).log2() + td.height() as f64);
        prop_assert!((tree.height() as f64) <= bound);
    }

    #[test]
    fn dp_matches_brute_force_on_graphs(seed in any::<u64>(), n in 1usize..9, extra in 0usize..6) {
        let g = gen::random_graph(n, n.saturating_sub(1) + extra, seed);
        let w = gen::dyadic_weights(n, seed ^ 1);
        for problem in [Problem::Mwis, Problem::MinVertexCover, Problem::MinDominatingSet] {
            let opt = Pipeline::build(&g, problem).unwrap().table(&w).unwrap().root_opt();
            let (oracle, _) = brute_force_opt(&g, &w, problem).unwrap();
            prop_assert_eq!(opt, oracle, "{} on seed {}", problem.name(), seed);
        }
    }

    #[test]
    fn dp_matches_brute_force_on_cnf(seed in any::<u64>(), vars in 1usize..6, clauses in 1usize..7) {
        let inst = gen::random_cnf(vars, clauses, seed);
        let vw = gen::dyadic_weights(vars, seed ^ 2);
        let (g, w) = build_incidence_graph(&inst, &vw).unwrap();
        let pipeline = Pipeline::build(&g, Problem::MaxOnes).unwrap();
        let table = pipeline.table(&w).unwrap();
        let opt = table.root_opt();
        let (oracle, _) = brute_force_opt(&g, &w, Problem::MaxOnes).unwrap();
        prop_assert_eq!(opt, oracle);
        // Feasible instances stay feasible through randomized extraction,
        // and the output decodes to a satisfying assignment.
        if opt.is_some() {
            let eps = pipeline.epsilon_per_node(0.5).unwrap();
            for run in 0..3u64 {
                let x = pipeline
                    .extract(&w, &table, &ExtractConfig::soft(eps, seed.wrapping_add(run)))
                    .unwrap();
                prop_assert!(Problem::MaxOnes.validate_solution(&g, &x));
                let assignment: Vec<bool> = (0..inst.num_vars).map(|i| x.contains(i)).collect();
                prop_assert!(inst.satisfied_by(&assignment));
            }
        }
    }

    #[test]
    fn extraction_always_feasible(seed in any::<u64>(), n in 2usize..9, extra in 0usize..6) {
        let g = gen::random_graph(n, n - 1 + extra, seed);
        let w = gen::dyadic_weights(n, seed ^ 3);
        for problem in [Problem::Mwis, Problem::MinVertexCover, Problem::MinDominatingSet] {
            let pipeline = Pipeline::build(&g, problem).unwrap();
            let table = pipeline.table(&w).unwrap();
            let eps = pipeline.epsilon_per_node(0.5).unwrap();
            for run in 0..3u64 {
                let x = pipeline
                    .extract(&w, &table, &ExtractConfig::soft(eps, seed.wrapping_add(run)))
                    .unwrap();
                prop_assert!(problem.validate_solution(&g, &x));
            }
        }
    }
}
