use proptest::prelude::*;

use grtl_core::gadgets::{bump_memorizer_stack, indicator_stack};
use grtl_core::graph::random_permutation;
use grtl_core::nn::softmax;
use grtl_core::oracles::component_count;
use grtl_core::tokenize::{
    graph_from_adjacency_tokens, laplacian, laplacian_eigen, tokenize_adjacency,
};
use grtl_core::*;

fn graph_strategy(directed: bool) -> impl Strategy<Value = Graph> {
    (2usize..14, any::<u64>(), 0.0f64..0.6).prop_map(move |(n, seed, p)| {
        let mut g = Graph::empty(n, directed);
        let mut state = seed;
        for u in 0..n {
            for v in 0..n {
                if u == v || (!directed && v < u) {
                    continue;
                }
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                if ((state >> 11) as f64 / (1u64 << 53) as f64) < p {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bfs_and_union_find_agree(g in graph_strategy(false)) {
        prop_assert_eq!(oracle_connected(&g), component_count(&g) == 1);
    }

    #[test]
    fn relabeling_preserves_structure(g in graph_strategy(true), s in any::<u64>()) {
        let h = g.relabel(&random_permutation(g.n(), s)).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count());
        prop_assert_eq!(oracle_connected(&h), oracle_connected(&g));
        prop_assert!(h.is_consistent());
    }

    #[test]
    fn adjacency_tokens_are_lossless(g in graph_strategy(true), pad in 0usize..4) {
        let tg = tokenize_adjacency(&g, g.n() + pad, false).unwrap();
        let back = graph_from_adjacency_tokens(&tg, true).unwrap();
        prop_assert_eq!(back.sorted_edges()[..].to_vec(), g.sorted_edges());
    }

    #[test]
    fn powers_compose(g in graph_strategy(true), a in 1u32..3, b in 1u32..3) {
        let n = g.n();
        let (pa, pb, pab) = (
            oracle_matrix_power(&g, a).unwrap(),
            oracle_matrix_power(&g, b).unwrap(),
            oracle_matrix_power(&g, a + b).unwrap(),
        );
        for i in 0..n {
            for j in 0..n {
                let s: u64 = (0..n).map(|m| pa.get(i, m) * pb.get(m, j)).sum();
                prop_assert_eq!(s, pab.get(i, j));
            }
        }
    }

    #[test]
    fn softmax_is_a_shift_invariant_distribution(
        logits in prop::collection::vec(-50.0f64..50.0, 1..40),
        shift in -100.0f64..100.0,
    ) {
        let w = softmax(&logits).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
        let v = softmax(&shifted).unwrap();
        for (x, y) in w.iter().zip(&v) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_eigenpairs_are_accurate(g in graph_strategy(false)) {
        let n = g.n();
        let l = laplacian(&g).unwrap();
        let e = laplacian_eigen(&g).unwrap();
        for k in 0..n {
            let v = e.vectors.column(k);
            let lv = l.matvec(&v);
            for i in 0..n {
                prop_assert!((lv[i] - e.values[k] * v[i]).abs() <= 1e-8 * n as f64);
            }
            for m in 0..n {
                let dot: f64 = v.iter().zip(e.vectors.column(m)).map(|(a, b)| a * b).sum();
                let want = if m == k { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-8);
            }
        }
        let zeros = e.values.iter().filter(|x| x.abs() <= 1e-9).count();
        prop_assert_eq!(zeros, component_count(&g));
    }

    #[test]
    fn indicators_are_exact_on_integers(r in -50i64..50, len in 0i64..20) {
        let s = r + len;
        let f = indicator_stack(r, s).unwrap();
        for z in r - 3..=s + 3 {
            let want = if (r..=s).contains(&z) { 1.0 } else { 0.0 };
            prop_assert_eq!(f.eval_scalar(z as f64), want);
        }
    }

    #[test]
    fn memorizer_hits_dyadic_anchors(
        table in prop::collection::btree_map(-1000i32..1000, -100.0f64..100.0, 1..64),
        exp in -8i32..8,
    ) {
        let scale = 2f64.powi(exp);
        let pairs: Vec<(f64, f64)> = table.iter().map(|(&a, &b)| (a as f64 * scale, b)).collect();
        let net = bump_memorizer_stack(&pairs).unwrap();
        for &(a, b) in &pairs {
            prop_assert!((net.eval_scalar(a) - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn memorizer_hits_real_anchors(
        table in prop::collection::btree_map(0u32..10_000, -100.0f64..100.0, 1..64),
        scale in 1e-3f64..1.0,
    ) {
        let pairs: Vec<(f64, f64)> = table.iter().map(|(&a, &b)| (a as f64 * scale, b)).collect();
        let net = bump_memorizer_stack(&pairs).unwrap();
        for &(a, b) in &pairs {
            prop_assert!((net.eval_scalar(a) - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn reduction_preserves_the_cycle_count(half in 2usize..6, parts in 1usize..3, s in any::<u64>()) {
        let n = 2 * half;
        let g = gen_cycles(n * n / 2, parts, s).unwrap();
        let inst = reduce_cycles_to_eulerian(&g, Turnaround::Auto).unwrap();
        prop_assert_eq!(verify_eulerian(&inst).unwrap(), parts == 1);
        let census = fragment_cycle_census(&inst).unwrap();
        prop_assert_eq!(census.iter().sum::<usize>(), inst.edges.len());
    }
}
