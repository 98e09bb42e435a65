//! Maximum, greedy and semi-random matchings.

mod exact;
mod nibble;
mod sparsify;

pub use exact::{
    default_node_budget, exact_nu, exact_nu_with, ExactOptions, ExactOutcome, DEFAULT_NODE_BUDGET,
    NODE_BUDGET_ENV,
};
pub use nibble::{nibble_matching, NibbleConfig, NibbleReport, RegularityGate, RoundStats};
pub use sparsify::{sparsify_by_fractional, SparsifyReport};

use crate::hypergraph::{KGraph, Matching};

/// Maximal matching from one pass over the edges in lexicographic order.
pub fn greedy_matching(h: &KGraph) -> Matching {
    let mut used = vec![false; h.n() + 1];
    let mut out = Vec::new();
    for e in h.edges() {
        if e.iter().all(|&v| !used[v as usize]) {
            for &v in e {
                used[v as usize] = true;
            }
            out.push(e.to_vec());
        }
    }
    Matching::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        build_hknm, complete, join_clique, parity_construction, random_kgraph, space_barrier,
    };
    use proptest::prelude::*;

    /// Largest pairwise-disjoint subfamily, by trying every edge subset.
    fn nu_oracle(h: &KGraph) -> usize {
        let edges: Vec<&[u32]> = h.edges().collect();
        let e = edges.len();
        assert!(e <= 20);
        let mut best = 0;
        for mask in 0u32..1 << e {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let mut seen = vec![false; h.n() + 1];
            let ok = (0..e).filter(|i| mask >> i & 1 == 1).all(|i| {
                edges[i]
                    .iter()
                    .all(|&v| !std::mem::replace(&mut seen[v as usize], true))
            });
            if ok {
                best = size;
            }
        }
        best
    }

    #[test]
    fn known_values() {
        let (nu, m) = exact_nu(&build_hknm(9, 3, 3).unwrap().0).unwrap();
        assert_eq!(nu, 2);
        assert_eq!(m.len(), 2);
        assert_eq!(exact_nu(&complete(6, 3).unwrap()).unwrap().0, 2);
        let sb = space_barrier(6, 3).unwrap();
        assert_eq!(exact_nu(&sb).unwrap().0, 1);
        assert_eq!(nu_oracle(&sb), 1);
        assert_eq!(
            exact_nu(&parity_construction(3, 3, 3).unwrap()).unwrap().0,
            1
        );
        assert_eq!(exact_nu(&KGraph::edgeless(5, 3)).unwrap().0, 0);
    }

    #[test]
    fn greedy_examples() {
        let m = greedy_matching(&complete(6, 3).unwrap());
        assert_eq!(m.edges(), &[vec![1, 2, 3], vec![4, 5, 6]]);
        assert!(greedy_matching(&KGraph::edgeless(6, 3)).is_empty());
        let one = KGraph::new(5, 3, [vec![2, 3, 5]]).unwrap();
        assert_eq!(greedy_matching(&one).edges(), &[vec![2, 3, 5]]);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let h = build_hknm(14, 3, 4).unwrap().0;
        let opts = ExactOptions {
            budget: 3,
            lp_bound: false,
        };
        assert_eq!(
            exact_nu_with(&h, &opts),
            Err(crate::Error::BudgetExhausted { budget: 3 })
        );
    }

    #[test]
    fn lp_bound_agrees() {
        for seed in 0..20 {
            let h = random_kgraph(10, 3, 0.3, seed).unwrap();
            let plain = exact_nu_with(
                &h,
                &ExactOptions {
                    budget: u64::MAX,
                    lp_bound: false,
                },
            )
            .unwrap();
            let lp = exact_nu_with(
                &h,
                &ExactOptions {
                    budget: u64::MAX,
                    lp_bound: true,
                },
            )
            .unwrap();
            assert_eq!(plain.nu, lp.nu);
            assert!(lp.nodes <= plain.nodes);
        }
    }

    proptest! {
        #[test]
        fn exact_matches_oracle(seed in 0u64..100_000, n in 3usize..10, k in 2usize..4) {
            let total = crate::numeric::binomial_u64(n as u64, k as u64) as f64;
            let h = random_kgraph(n, k, (14.0 / total).min(1.0), seed).unwrap();
            prop_assume!(h.edge_count() <= 18);
            let (nu, m) = exact_nu(&h).unwrap();
            prop_assert!(h.verify_matching(&m));
            prop_assert_eq!(m.len(), nu);
            prop_assert_eq!(nu, nu_oracle(&h));
        }

        #[test]
        fn vertex_deletion_costs_at_most_one(seed in 0u64..10_000, n in 4usize..12, v in 1u32..12) {
            let h = random_kgraph(n, 3, 0.3, seed).unwrap();
            let v = 1 + (v - 1) % n as u32;
            let (sub, _) = h.remove(&[v]).unwrap();
            prop_assert!(exact_nu(&sub).unwrap().0 + 1 >= exact_nu(&h).unwrap().0);
        }

        #[test]
        fn clique_join_bounds(seed in 0u64..10_000, n in 4usize..10, r in 0usize..3) {
            let h = random_kgraph(n, 3, 0.2, seed).unwrap();
            let nu = exact_nu(&h).unwrap().0;
            let nu_r = exact_nu(&join_clique(&h, r)).unwrap().0;
            prop_assert!(nu_r >= nu);
            prop_assert!(nu + r >= nu_r);
        }

        #[test]
        fn greedy_is_maximal(seed in 0u64..10_000, n in 3usize..12, p in 0.0f64..1.0) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let m = greedy_matching(&h);
            prop_assert!(h.verify_matching(&m));
            let used = m.vertices();
            prop_assert!(h.edges().all(|e| e.iter().any(|v| used.contains(v))));
        }
    }
}
