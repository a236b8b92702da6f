use serde_json::{json, Value};

use caperc_core::graph::{figure1_gadget, sample_layer};
use caperc_core::seed::split;
use caperc_core::theory::{self, SubsetFixedPoint};
use caperc_core::{
    ca_partition, ca_partition_oracle, census, max_separation, ColorParams, ColorSet, ColoredMultigraph, Partition,
    Support, SupportClassifier,
};

use crate::output::{document, emit, pretty};
use crate::{Failure, Format, Shared};

pub const SUITES: [&str; 4] = ["ca", "fig1", "separation", "fixedpoint"];

const CA_CASES: usize = 1000;
const CA_EDGE_PROB: f64 = 0.3;
const DEFAULT_SEED: u64 = 0x5EED;

struct SuiteReport {
    name: &'static str,
    total: usize,
    failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn passed(&self) -> usize {
        self.total - self.failures.len()
    }
}

pub fn run(shared: &Shared, suites: Option<Vec<String>>, negative: bool) -> Result<(), Failure> {
    let names = match suites {
        Some(list) => {
            for s in &list {
                if !SUITES.contains(&s.as_str()) {
                    return Err(Failure::Usage(format!(
                        "--suites: unknown suite {s:?} (expected one of {})",
                        SUITES.join(", ")
                    )));
                }
            }
            list
        }
        None => SUITES.iter().map(|s| s.to_string()).collect(),
    };
    let seed = shared.seed.unwrap_or(DEFAULT_SEED);
    let reports: Vec<SuiteReport> = SUITES
        .iter()
        .filter(|s| names.iter().any(|n| n == *s))
        .map(|&s| match s {
            "ca" => ca_suite(seed, negative),
            "fig1" => fig1_suite(),
            "separation" => separation_suite(),
            _ => fixedpoint_suite(),
        })
        .collect();
    let ok = reports.iter().all(|r| r.failures.is_empty());
    let text = match shared.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&document(json!({
            "passed": ok,
            "suites": reports.iter().map(|r| json!({
                "name": r.name,
                "total": r.total,
                "passed": r.passed(),
                "failures": r.failures,
            })).collect::<Vec<Value>>(),
        }))),
        Format::Csv => {
            let mut s = String::from("suite,total,passed,failed\n");
            for r in &reports {
                s.push_str(&format!("{},{},{},{}\n", r.name, r.total, r.passed(), r.failures.len()));
            }
            s
        }
    };
    emit(shared.out.as_deref(), &text)?;
    for r in &reports {
        eprintln!("{}: {}/{} passed", r.name, r.passed(), r.total);
        for f in r.failures.iter().take(5) {
            eprintln!("  {f}");
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

/// Random colored graph with `n ∈ [2, 8]`, `k ∈ {2, 3, 4}` and every pair
/// present in each layer with probability `p`.
pub fn small_random_graph(case_seed: u64, p: f64) -> ColoredMultigraph {
    let n = 2 + (case_seed % 7) as usize;
    let k = 2 + ((case_seed >> 8) % 3) as usize;
    let layers = (0..k).map(|i| sample_layer(n, p, split(case_seed, i as u64))).collect();
    ColoredMultigraph::from_layers(n, layers).expect("sampled layers are simple")
}

fn ca_suite(seed: u64, negative: bool) -> SuiteReport {
    let mut r = SuiteReport::new("ca");
    for case in 0..CA_CASES {
        let g = small_random_graph(split(seed, case as u64), CA_EDGE_PROB);
        let fast = ca_partition(&g).partition;
        let mut oracle = ca_partition_oracle(&g).expect("n <= 8");
        if negative && case == 0 {
            oracle = if oracle == Partition::one_block(g.n()) {
                Partition::singletons(g.n())
            } else {
                Partition::one_block(g.n())
            };
        }
        r.check(fast == oracle, || {
            format!("case {case}: n={} k={} fast {:?} oracle {:?}", g.n(), g.k(), fast.blocks(), oracle.blocks())
        });
    }
    r
}

fn fig1_suite() -> SuiteReport {
    let mut r = SuiteReport::new("fig1");
    for ell in 1..=5 {
        let open = figure1_gadget(ell, false);
        let rep = ca_partition(&open);
        r.check(rep.max_size == 1, || format!("ell={ell} open: max block {}", rep.max_size));
        let c = census(&open, 24).expect("cap");
        let separated: usize = c.y.values().sum();
        r.check(c.c2 == 0 && separated == 0, || {
            format!("ell={ell} open: C2={} separated cycles={separated}", c.c2)
        });

        let closed = figure1_gadget(ell, true);
        let rep = ca_partition(&closed);
        let pairs = rep.count(2);
        let only_pairs = rep.histogram.keys().all(|&s| s <= 2);
        r.check(pairs == 2 * ell + 1 && only_pairs, || {
            format!("ell={ell} closed: histogram {:?}, expected {} blocks of size 2", rep.histogram, 2 * ell + 1)
        });
    }
    r
}

fn cycle_graph(colors: &[ColorSet], k: usize) -> ColoredMultigraph {
    let len = colors.len();
    let mut layers = vec![Vec::new(); k];
    for (j, set) in colors.iter().enumerate() {
        for c in set.iter() {
            layers[c].push((j, (j + 1) % len));
        }
    }
    ColoredMultigraph::from_layers(len, layers).expect("cycle is simple per layer")
}

fn sets(cols: &[&[usize]]) -> Vec<ColorSet> {
    cols.iter().map(|c| ColorSet::from_colors(c.iter().copied())).collect()
}

fn separation_suite() -> SuiteReport {
    let mut r = SuiteReport::new("separation");
    let cases: [(&[&[usize]], usize); 10] = [
        (&[&[0], &[1], &[2]], 3),
        (&[&[0], &[0], &[0]], 1),
        (&[&[0], &[1], &[0], &[1]], 1),
        (&[&[0], &[0], &[1], &[1]], 2),
        (&[&[0, 1], &[2], &[2]], 2),
        (&[&[0], &[1], &[0], &[2], &[2], &[2]], 2),
        (&[&[0], &[0], &[1], &[2], &[2]], 3),
        (&[&[0, 1], &[0, 1], &[0, 1]], 1),
        (&[&[0], &[1], &[2], &[3]], 4),
        (&[&[0], &[1], &[0], &[1], &[2]], 2),
    ];
    for (cols, want) in cases {
        let s = sets(cols);
        let got = max_separation(&s).expect("nonempty sets");
        r.check(got == want, || format!("{cols:?}: max_separation {got}, expected {want}"));
    }
    // single-colored cycles: the largest CA block equals the separation
    for len in 3..=6usize {
        let k: usize = 3;
        for code in 0..k.pow(len as u32) {
            let cols: Vec<ColorSet> = (0..len)
                .map(|j| ColorSet::single(code / k.pow(j as u32) % k))
                .collect();
            let parts = max_separation(&cols).expect("nonempty sets");
            let g = cycle_graph(&cols, k);
            let report = ca_partition(&g);
            let ok = report.max_size == parts;
            let classifier = SupportClassifier::new(&g, &report);
            let supports_ok = report
                .partition
                .blocks()
                .iter()
                .filter(|b| b.len() > 1)
                .all(|b| matches!(classifier.classify(b), Ok(Support::Cycle(ref c)) if c.max_parts == b.len()));
            r.check(ok && supports_ok, || {
                format!("cycle {cols:?}: separation {parts}, CA max block {}", report.max_size)
            });
        }
    }
    r
}

fn fixedpoint_suite() -> SuiteReport {
    let mut r = SuiteReport::new("fixedpoint");
    let grid: [&[f64]; 8] = [
        &[1.5, 1.5],
        &[1.5, 0.5],
        &[0.3, 0.3, 0.3],
        &[2.0, 1.0, 0.5],
        &[1.2, 1.1, 0.9, 0.4],
        &[3.0, 0.2],
        &[0.9, 0.9, 0.9],
        &[1.01, 1.01],
    ];
    for lambdas in grid {
        let p = ColorParams::new(lambdas).expect("valid");
        let sys = SubsetFixedPoint::solve(&p);
        r.check(sys.converged && sys.monotone, || format!("{lambdas:?}: converged={} monotone={}", sys.converged, sys.monotone));
        for (i, star) in p.lambda_star().into_iter().enumerate() {
            let x = sys.get(ColorSet::single(i));
            let expect = 1.0 - theory::mu(star).expect("positive");
            r.check((x - expect).abs() <= 1e-9, || {
                format!("{lambdas:?}: x_{{{}}} = {x}, 1 - mu({star}) = {expect}", i + 1)
            });
        }
    }
    let above = theory::a1(&ColorParams::new(&[1.01, 1.01]).expect("valid"));
    let below = theory::a1(&ColorParams::new(&[0.99, 0.99]).expect("valid"));
    r.check(above > 0.0 && below == 0.0, || format!("a1 sign flip: a1(1.01)={above}, a1(0.99)={below}"));
    r
}
