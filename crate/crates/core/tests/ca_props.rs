use proptest::prelude::*;

use caperc_core::ca::{ca_relation, components, size_census};
use caperc_core::graph::GREEN;
use caperc_core::{
    ca_partition, ca_partition_oracle, components_avoiding, figure1_gadget, ColoredMultigraph, Partition, ViewMode,
};

/// `n ∈ [2, 8]`, `k ∈ {2, 3, 4}`, each pair in each layer with probability 0.3.
fn arb_small() -> impl Strategy<Value = ColoredMultigraph> {
    (2usize..=8, 2usize..=4).prop_flat_map(|(n, k)| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(proptest::bool::weighted(0.3), pairs * k).prop_map(move |bits| layered(n, k, &bits))
    })
}

fn layered(n: usize, k: usize, bits: &[bool]) -> ColoredMultigraph {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let layers = (0..k)
        .map(|i| {
            all.iter()
                .enumerate()
                .filter(|(j, _)| bits[i * all.len() + j])
                .map(|(_, &e)| e)
                .collect()
        })
        .collect();
    ColoredMultigraph::from_layers(n, layers).unwrap()
}

fn graph(n: usize, layers: Vec<Vec<(usize, usize)>>) -> ColoredMultigraph {
    ColoredMultigraph::from_layers(n, layers).unwrap()
}

#[test]
fn components_avoiding_examples() {
    let g = graph(2, vec![vec![(0, 1)], vec![]]);
    assert_eq!(components_avoiding(&g, 0).unwrap().blocks(), vec![vec![0], vec![1]]);
    let g = graph(2, vec![vec![(0, 1)], vec![(0, 1)]]);
    assert_eq!(components_avoiding(&g, 0).unwrap().blocks(), vec![vec![0, 1]]);
    let gadget = figure1_gadget(1, false);
    let p = components_avoiding(&gadget, GREEN).unwrap();
    assert_eq!(p.blocks(), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    assert!(components_avoiding(&gadget, 3).is_err());
}

#[test]
fn meet_examples() {
    let p = Partition::from_keys([0, 0, 1, 1, 0]);
    assert_eq!(p.meet(&Partition::singletons(5)).unwrap(), Partition::singletons(5));
    assert_eq!(p.meet(&p).unwrap(), p);
    assert_eq!(p.meet(&Partition::one_block(5)).unwrap(), p);
    assert!(p.meet(&Partition::one_block(4)).is_err());
}

#[test]
fn ca_partition_examples() {
    let tri = graph(3, vec![vec![(0, 1)], vec![(1, 2)], vec![(0, 2)]]);
    let r = ca_partition(&tri);
    assert_eq!(r.partition.blocks(), vec![vec![0, 1, 2]]);
    assert_eq!(r.count(3), 1);
    assert_eq!(ca_partition_oracle(&tri).unwrap(), r.partition);

    let r = ca_partition(&figure1_gadget(2, true));
    assert_eq!(r.count(2), 5);
    assert_eq!(r.max_size, 2);

    let path = graph(3, vec![vec![(0, 1), (1, 2)], vec![]]);
    assert_eq!(ca_partition(&path).max_size, 1);

    let two = graph(4, vec![vec![(0, 1), (2, 3)], vec![(0, 1), (2, 3)]]);
    assert_eq!(ca_partition_oracle(&two).unwrap().blocks(), vec![vec![0, 1], vec![2, 3]]);
    assert!(ca_partition_oracle(&ColoredMultigraph::empty(17, 2)).is_err());
}

#[test]
fn size_census_examples() {
    assert_eq!(size_census(&Partition::singletons(5)), [(1, 5)].into());
    assert_eq!(size_census(&Partition::from_keys([0, 0, 0, 1, 2])), [(1, 2), (3, 1)].into());
    let r = ca_partition(&figure1_gadget(1, true));
    assert_eq!(r.partition.n(), 8);
    assert_eq!(size_census(&r.partition), [(1, 2), (2, 3)].into());
}

#[test]
fn partition_dump_format() {
    let p = Partition::from_keys([7, 3, 7, 9, 3]);
    assert_eq!(p.dump(), "block 0: 0 2\nblock 1: 1 4\nblock 3: 3\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_oracle(g in arb_small()) {
        prop_assert_eq!(ca_partition(&g).partition, ca_partition_oracle(&g).unwrap());
    }
}

proptest! {
    #[test]
    fn report_is_consistent(g in arb_small()) {
        let r = ca_partition(&g);
        let total: usize = r.histogram.iter().map(|(l, c)| l * c).sum();
        prop_assert_eq!(total, g.n());
        prop_assert_eq!(Some(&r.max_size), r.histogram.keys().max());
        for v in 0..g.n() {
            let l = r.partition.label(v);
            prop_assert_eq!(r.partition.label(l), l);
            prop_assert!(l <= v);
        }
    }

    #[test]
    fn oracle_relation_is_equivalence(g in arb_small()) {
        let rel = ca_relation(&g).unwrap();
        let n = g.n();
        for u in 0..n {
            prop_assert!(rel[u][u]);
            for v in 0..n {
                prop_assert_eq!(rel[u][v], rel[v][u]);
                for w in 0..n {
                    if rel[u][v] && rel[v][w] {
                        prop_assert!(rel[u][w]);
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_refine_avoided_and_full_components(g in arb_small()) {
        let r = ca_partition(&g);
        prop_assert_eq!(r.avoided_partitions.len(), g.k());
        for p in &r.avoided_partitions {
            prop_assert!(r.partition.refines(p));
        }
        let full = components(&g.view(ViewMode::All).unwrap());
        prop_assert!(r.partition.refines(&full));
    }

    #[test]
    fn adding_an_edge_never_splits(g in arb_small(), u in 0usize..8, v in 0usize..8, color in 0usize..4) {
        let (u, v, color) = (u % g.n(), v % g.n(), color % g.k());
        prop_assume!(u != v);
        let e = (u.min(v), u.max(v));
        let mut layers = g.layers().to_vec();
        prop_assume!(!layers[color].contains(&e));
        layers[color].push(e);
        let bigger = ColoredMultigraph::from_layers(g.n(), layers).unwrap();
        let before = ca_partition(&g);
        let after = ca_partition(&bigger);
        prop_assert!(before.partition.refines(&after.partition));
        for (b, a) in before.avoided_partitions.iter().zip(&after.avoided_partitions) {
            prop_assert!(b.refines(a));
        }
    }

    #[test]
    fn relabeling_colors_is_invariant(g in arb_small(), rot in 0usize..4, flip in any::<bool>()) {
        let k = g.k();
        let mut order: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        if flip {
            order.reverse();
        }
        let layers = order.iter().map(|&i| g.layer(i).to_vec()).collect();
        let permuted = ColoredMultigraph::from_layers(g.n(), layers).unwrap();
        prop_assert_eq!(ca_partition(&permuted).partition, ca_partition(&g).partition);
    }
}
