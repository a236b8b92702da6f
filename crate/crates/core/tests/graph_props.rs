use std::collections::HashSet;

use proptest::prelude::*;

use caperc_core::graph::{deserialize, sample_layer, serialize};
use caperc_core::seed::split;
use caperc_core::{ca_partition, figure1_gadget, generate, ColorParams, ColorSet, ColoredMultigraph, Error, ViewMode};

fn arb_graph() -> impl Strategy<Value = ColoredMultigraph> {
    (2usize..=9, 2usize..=4).prop_flat_map(|(n, k)| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(proptest::bool::weighted(0.35), pairs * k).prop_map(move |bits| {
            let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let layers = (0..k)
                .map(|i| all.iter().enumerate().filter(|(j, _)| bits[i * pairs + j]).map(|(_, &e)| e).collect())
                .collect();
            ColoredMultigraph::from_layers(n, layers).unwrap()
        })
    })
}

#[test]
fn near_empty_generation() {
    let p = ColorParams::new(&[0.0001, 0.0001]).unwrap();
    let g = generate(&p, 10, 123).unwrap();
    assert_eq!(g.edge_count(), 0);
    assert_eq!(ca_partition(&g).max_size, 1);
}

#[test]
fn layer_edge_counts_near_mean() {
    let n = 100_000usize;
    let p = ColorParams::new(&[0.3, 0.3, 0.3]).unwrap();
    let g = generate(&p, n, 2024).unwrap();
    let pairs = (n * (n - 1) / 2) as f64;
    let prob = 0.3 / n as f64;
    let mean = pairs * prob;
    let sd = (pairs * prob * (1.0 - prob)).sqrt();
    for i in 0..3 {
        let m = g.layer(i).len() as f64;
        assert!((m - mean).abs() <= 5.0 * sd, "layer {i}: {m} vs {mean} ± {sd}");
    }
}

#[test]
fn generation_independent_of_threads() {
    let p = ColorParams::new(&[0.3, 0.3, 0.3]).unwrap();
    let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let a = pool(1).install(|| generate(&p, 100_000, 99).unwrap());
    let b = pool(8).install(|| generate(&p, 100_000, 99).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, generate(&p, 100_000, 99).unwrap());
    assert_ne!(a, generate(&p, 100_000, 100).unwrap());
}

#[test]
fn exact_pair_frequency() {
    let n = 100usize;
    let lambda = 1.0;
    let prob = lambda / n as f64;
    let reps = 10_000usize;
    let watched = [(0usize, 1usize), (17, 42), (98, 99)];
    let mut hits = [0usize; 3];
    for r in 0..reps {
        let layer: HashSet<(usize, usize)> = sample_layer(n, prob, split(7, r as u64)).into_iter().collect();
        for (h, e) in hits.iter_mut().zip(&watched) {
            *h += layer.contains(e) as usize;
        }
    }
    let se = (prob * (1.0 - prob) / reps as f64).sqrt();
    for (h, e) in hits.iter().zip(&watched) {
        let freq = *h as f64 / reps as f64;
        assert!((freq - prob).abs() <= 4.0 * se, "pair {e:?}: {freq} vs {prob} ± {se}");
    }
}

#[test]
fn layers_uncorrelated() {
    let n = 100usize;
    let p = ColorParams::new(&[1.0, 1.0]).unwrap();
    let reps = 10_000usize;
    let (mut x, mut y) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
    for r in 0..reps {
        let g = generate(&p, n, split(11, r as u64)).unwrap();
        x.push(g.layer(0).contains(&(1, 2)) as u8 as f64);
        y.push(g.layer(1).contains(&(1, 2)) as u8 as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&x), mean(&y));
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / reps as f64;
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / reps as f64).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / reps as f64).sqrt();
    let corr = cov / (sx * sy);
    let se = 1.0 / (reps as f64).sqrt();
    assert!(corr.abs() <= 4.0 * se, "corr {corr}");
}

#[test]
fn generate_rejects_bad_input() {
    let p = ColorParams::new(&[0.5, 0.5]).unwrap();
    assert!(generate(&p, 1, 0).is_err());
    let big = ColorParams::new(&[5.0, 0.5]).unwrap();
    assert!(generate(&big, 4, 0).is_err());
}

#[test]
fn view_examples() {
    let single = ColoredMultigraph::from_layers(3, vec![vec![(1, 2)], vec![]]).unwrap();
    assert!(single.view(ViewMode::Avoid(0)).unwrap().edges().is_empty());
    let doubled = ColoredMultigraph::from_layers(3, vec![vec![(1, 2)], vec![(1, 2)]]).unwrap();
    assert_eq!(doubled.view(ViewMode::Avoid(0)).unwrap().edges(), vec![(1, 2)]);
    let g = figure1_gadget(2, true);
    let mut union: Vec<_> = g.layers().iter().flatten().copied().collect();
    union.sort();
    union.dedup();
    assert_eq!(g.view(ViewMode::All).unwrap().edges(), union);
    assert!(matches!(g.view(ViewMode::Avoid(3)), Err(Error::ColorOutOfRange { .. })));
}

#[test]
fn gadget_round_trip_and_errors() {
    for ell in 1..=5 {
        for closing in [false, true] {
            let g = figure1_gadget(ell, closing);
            let text = serialize(&g);
            let back = deserialize(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(serialize(&back), text);
        }
    }
    let self_loop = "caperc-graph v1 n=6 k=1\nlayer 1 m=1\n5 5\n";
    assert!(matches!(deserialize(self_loop), Err(Error::SelfLoop(5, _))));
    let dup = "caperc-graph v1 n=6 k=1\nlayer 1 m=2\n1 2\n1 2\n";
    assert!(matches!(deserialize(dup), Err(Error::DuplicateEdge(1, 2, _))));
    assert!(deserialize("caperc-graph v2 n=6 k=1\n").is_err());
    assert!(deserialize("caperc-graph v1 n=3 k=1\nlayer 1 m=1\n0 3\n").is_err());
}

proptest! {
    #[test]
    fn avoided_view_covers_other_layers(g in arb_graph()) {
        let all: HashSet<_> = g.view(ViewMode::All).unwrap().edges().into_iter().collect();
        for i in 0..g.k() {
            let avoid: HashSet<_> = g.view(ViewMode::Avoid(i)).unwrap().edges().into_iter().collect();
            let mut covered = avoid.clone();
            covered.extend(g.layer(i).iter().copied());
            prop_assert!(covered.is_superset(&all));
            for j in (0..g.k()).filter(|&j| j != i) {
                for e in g.layer(j) {
                    prop_assert!(avoid.contains(e));
                }
            }
            for e in &avoid {
                prop_assert!((0..g.k()).any(|j| j != i && g.layer(j).contains(e)));
            }
        }
    }

    #[test]
    fn only_view_is_union(g in arb_graph(), mask in 1u32..16) {
        let set = ColorSet(mask & ((1 << g.k()) - 1));
        prop_assume!(!set.is_empty());
        let mut want: Vec<_> = set.iter().flat_map(|c| g.layer(c).iter().copied()).collect();
        want.sort();
        want.dedup();
        prop_assert_eq!(g.view(ViewMode::Only(set)).unwrap().edges(), want);
    }

    #[test]
    fn serialization_round_trips(g in arb_graph()) {
        let text = serialize(&g);
        prop_assert_eq!(deserialize(&text).unwrap(), g);
    }

    #[test]
    fn generate_is_pure(seed in any::<u64>(), n in 2usize..300) {
        let p = ColorParams::new(&[1.2, 0.7, 0.3]).unwrap();
        prop_assert_eq!(generate(&p, n, seed).unwrap(), generate(&p, n, seed).unwrap());
    }
}
