//! Reproducible parallel trials and the estimators built on them.
//!
//! Trial `t` of an experiment draws everything from `split(master_seed, t)`:
//! the colored graph from child 0, the single-layer graph from child 1 and
//! the vertex marks from child 2. Trials run on a rayon pool and are
//! reassembled by index, so output is independent of the worker count.

mod experiments;
pub mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::{self, CaReport};
use crate::census::{self, CensusResult, DEFAULT_MAX_CYCLE_LEN};
use crate::error::{Error, Result};
use crate::graph::{self, ColoredMultigraph, ViewMode};
use crate::params::ColorParams;
use crate::partition::Partition;
use crate::seed;
use crate::theory::{self, Regime};
use crate::union_find::UnionFind;

pub use experiments::*;
pub use stats::{
    bootstrap_mean, covariance_ci, poisson_gof, quantile, Estimate, GofResult, SummaryStats,
    SUMMARY_CSV_HEADER,
};

/// Default cap on `n · trials`.
pub const DEFAULT_WORK_LIMIT: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// CA-partition of the colored graph.
    Ca,
    /// Repeated edges, short cycles, separation and excess flags.
    Census,
    /// Component sizes of a single layer `G(n, lambda_single / n)`.
    Components,
    /// Largest number of marked vertices in one component of the single layer.
    BlackClusters,
}

impl Measurement {
    pub fn as_str(self) -> &'static str {
        match self {
            Measurement::Ca => "ca",
            Measurement::Census => "census",
            Measurement::Components => "components",
            Measurement::BlackClusters => "black_clusters",
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ca" => Ok(Measurement::Ca),
            "census" => Ok(Measurement::Census),
            "components" => Ok(Measurement::Components),
            "black_clusters" => Ok(Measurement::BlackClusters),
            other => Err(Error::InvalidConfig(format!("unknown measurement {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Required for `ca` and `census`.
    pub params: Option<ColorParams>,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub max_cycle_len: usize,
    pub measurements: BTreeSet<Measurement>,
    /// Mark probability for `black_clusters`.
    pub q_black: Option<f64>,
    /// Intensity of the single layer for `components` / `black_clusters`.
    pub lambda_single: Option<f64>,
    /// Raise the `n · trials` guard.
    pub work_limit: u128,
}

impl ExperimentConfig {
    pub fn colored(params: ColorParams, n: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            params: Some(params),
            n,
            trials,
            master_seed,
            max_cycle_len: DEFAULT_MAX_CYCLE_LEN,
            measurements: BTreeSet::from([Measurement::Ca]),
            q_black: None,
            lambda_single: None,
            work_limit: DEFAULT_WORK_LIMIT,
        }
    }

    pub fn single_layer(lambda: f64, n: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            params: None,
            n,
            trials,
            master_seed,
            max_cycle_len: DEFAULT_MAX_CYCLE_LEN,
            measurements: BTreeSet::from([Measurement::Components]),
            q_black: None,
            lambda_single: Some(lambda),
            work_limit: DEFAULT_WORK_LIMIT,
        }
    }

    pub fn with(mut self, m: Measurement) -> Self {
        self.measurements.insert(m);
        self
    }

    pub fn measures(&self, m: Measurement) -> bool {
        self.measurements.contains(&m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.measurements.is_empty() {
            return bad("no measurements requested".into());
        }
        let colored = self.measures(Measurement::Ca) || self.measures(Measurement::Census);
        if colored && self.params.is_none() {
            return bad("ca/census measurements need lambdas".into());
        }
        if let Some(p) = &self.params {
            if let Some(l) = p.lambdas().iter().find(|&&l| l > self.n as f64) {
                return bad(format!("intensity {l} exceeds n"));
            }
        }
        let single =
            self.measures(Measurement::Components) || self.measures(Measurement::BlackClusters);
        match self.lambda_single {
            None if single => return bad("components/black_clusters need lambda_single".into()),
            Some(l) if !(l > 0.0 && l <= self.n as f64) => {
                return bad(format!("lambda_single must be in (0, n], got {l}"))
            }
            _ => {}
        }
        match self.q_black {
            None if self.measures(Measurement::BlackClusters) => {
                return bad("black_clusters needs q_black".into())
            }
            Some(q) if !(q > 0.0 && q < 1.0) => return bad(format!("q_black must be in (0, 1), got {q}")),
            _ => {}
        }
        if self.measures(Measurement::Census) && !(3..=census::MAX_CYCLE_LEN_CAP).contains(&self.max_cycle_len) {
            return Err(Error::CycleLenOutOfRange(self.max_cycle_len));
        }
        let work = self.n as u128 * self.trials as u128;
        if work > self.work_limit {
            return Err(Error::ResourceGuard(work, self.work_limit));
        }
        Ok(())
    }

    pub fn regime(&self) -> Option<Regime> {
        self.params.as_ref().map(theory::classify_regime)
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// ignored. Keys: `lambdas`, `n`, `trials`, `seed`, `max_cycle_len`,
    /// `measurements`, `q_black`, `lambda_single`.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig {
            params: None,
            n: 0,
            trials: 1,
            master_seed: 0,
            max_cycle_len: DEFAULT_MAX_CYCLE_LEN,
            measurements: BTreeSet::new(),
            q_black: None,
            lambda_single: None,
            work_limit: DEFAULT_WORK_LIMIT,
        };
        let mut seen_n = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |what: &str| {
                Error::InvalidConfig(format!("line {}: cannot parse {what} {value:?}", i + 1))
            };
            match key {
                "lambdas" => cfg.params = Some(ColorParams::parse(value)?),
                "n" => {
                    cfg.n = value.parse().map_err(|_| num("n"))?;
                    seen_n = true;
                }
                "trials" => cfg.trials = value.parse().map_err(|_| num("trials"))?,
                "seed" => cfg.master_seed = value.parse().map_err(|_| num("seed"))?,
                "max_cycle_len" => cfg.max_cycle_len = value.parse().map_err(|_| num("max_cycle_len"))?,
                "q_black" => cfg.q_black = Some(value.parse().map_err(|_| num("q_black"))?),
                "lambda_single" => {
                    cfg.lambda_single = Some(value.parse().map_err(|_| num("lambda_single"))?)
                }
                "measurements" => {
                    cfg.measurements = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                other => {
                    return Err(Error::InvalidConfig(format!("line {}: unknown key {other:?}", i + 1)))
                }
            }
        }
        if !seen_n {
            return Err(Error::InvalidConfig("missing key n".into()));
        }
        if cfg.measurements.is_empty() {
            cfg.measurements.insert(if cfg.params.is_some() {
                Measurement::Ca
            } else {
                Measurement::Components
            });
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ca_size: Option<usize>,
    /// `ℓ ↦ N_ℓ`.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n_counts: Option<BTreeMap<usize, usize>>,
    /// Largest component of `G^i`, per color.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_component_sizes: Option<Vec<usize>>,
    /// In the strict intermediate regime: CA-components of size ≥ 3 not
    /// contained in a single component of both `G_k` and `G^k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub census: Option<CensusResult>,
    /// Largest component of the single layer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_component: Option<usize>,
    /// `s ↦ Z_s`, vertices in components of size at least `s`, recorded at
    /// each distinct component size `s`.
    #[serde(rename = "Z", skip_serializing_if = "Option::is_none")]
    pub z: Option<BTreeMap<usize, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub black_max: Option<usize>,
}

impl TrialRecord {
    pub fn count(&self, size: usize) -> usize {
        self.n_counts
            .as_ref()
            .and_then(|m| m.get(&size).copied())
            .unwrap_or(0)
    }

    /// `Z_s` for any `s ≥ 1`.
    pub fn z_at(&self, s: usize) -> Option<usize> {
        let z = self.z.as_ref()?;
        Some(z.range(s..).next().map(|(_, &v)| v).unwrap_or(0))
    }

    /// Keys sorted.
    pub fn to_json_line(&self) -> String {
        serde_json::to_value(self).expect("plain data").to_string()
    }

    /// Whether `N_m = Y_m` for `m ≥ 3` and `N_2 = Y_2 + C_2`. `None` unless
    /// both the CA-partition and the census were measured.
    pub fn census_consistent(&self, k: usize) -> Option<bool> {
        let census = self.census.as_ref()?;
        self.n_counts.as_ref()?;
        let sizes_ok = (3..=k).all(|m| self.count(m) == census.separated(m));
        let beyond_k = self.max_ca_size? <= k;
        Some(sizes_ok && beyond_k && self.count(2) == census.separated(2) + census.c2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryStats>,
    pub regime: Option<Regime>,
    /// The regime has no proven limit constant (`λ_{k−1}^* ≥ 1 > λ_1^*`).
    pub conjectural: bool,
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    seed::split(master, trial as u64)
}

/// Runs every trial on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;
    let summary = summarize(config, &records)?;
    let regime = config.regime();
    Ok(ExperimentOutput {
        records,
        summary,
        regime,
        conjectural: regime == Some(Regime::Intermediate),
    })
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_with_threads(config: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| run(config))
}

pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let tseed = trial_seed(config.master_seed, trial);
    let mut rec = TrialRecord {
        trial,
        seed: tseed,
        max_ca_size: None,
        n_counts: None,
        max_component_sizes: None,
        strict_violations: None,
        census: None,
        largest_component: None,
        z: None,
        black_max: None,
    };

    if let Some(params) = &config.params {
        let colored = config.measures(Measurement::Ca) || config.measures(Measurement::Census);
        if colored {
            let g = graph::generate(params, config.n, seed::split(tseed, 0))?;
            if config.measures(Measurement::Ca) {
                let report = ca::ca_partition(&g);
                rec.max_component_sizes =
                    Some(report.avoided_partitions.iter().map(Partition::max_block).collect());
                if theory::classify_regime(params) == Regime::IntermediateStrict {
                    rec.strict_violations = Some(strict_violations(&g, &report));
                }
                rec.max_ca_size = Some(report.max_size);
                rec.n_counts = Some(report.histogram);
            }
            if config.measures(Measurement::Census) {
                rec.census = Some(census::census(&g, config.max_cycle_len)?);
            }
        }
    }

    if let Some(lambda) = config.lambda_single {
        let single = config.measures(Measurement::Components)
            || config.measures(Measurement::BlackClusters);
        if single {
            let n = config.n;
            let edges = graph::sample_layer(n, lambda / n as f64, seed::split(tseed, 1));
            let mut uf = UnionFind::new(n);
            for &(u, v) in &edges {
                uf.union(u, v);
            }
            if config.measures(Measurement::Components) {
                let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
                for v in 0..n {
                    if uf.find(v) == v {
                        *sizes.entry(uf.set_size(v)).or_insert(0) += 1;
                    }
                }
                let mut z = BTreeMap::new();
                let mut acc = 0;
                for (&s, &count) in sizes.iter().rev() {
                    acc += s * count;
                    z.insert(s, acc);
                }
                rec.largest_component = sizes.keys().next_back().copied();
                rec.z = Some(z);
            }
            if let (true, Some(q)) = (config.measures(Measurement::BlackClusters), config.q_black) {
                let mut rng = seed::rng_from(seed::split(tseed, 2));
                let mut black = vec![0usize; n];
                for v in 0..n {
                    if rng.random_bool(q) {
                        let r = uf.find(v);
                        black[r] += 1;
                    }
                }
                rec.black_max = black.into_iter().max();
            }
        }
    }
    Ok(rec)
}

/// CA-components of size ≥ 3 that are not inside one component of `G_k`
/// and one component of `G^k` (colors sorted so that `k` is the weakest).
pub fn strict_violations(g: &ColoredMultigraph, report: &CaReport) -> usize {
    let last = g.k() - 1;
    let only_last = ca::components(
        &g.view(ViewMode::Only(graph::ColorSet::single(last)))
            .expect("color in range"),
    );
    let avoid_last = &report.avoided_partitions[last];
    report
        .partition
        .blocks()
        .into_iter()
        .filter(|b| b.len() >= 3)
        .filter(|b| {
            !b.iter().all(|&v| {
                only_last.same_block(v, b[0]) && avoid_last.same_block(v, b[0])
            })
        })
        .count()
}

/// Per-measurement summary rows. Poisson goodness-of-fit is attached where a
/// limit law is known and at least 500 trials are available: `N_k` against
/// `β_k` (subcritical), `C_2` and `C_m` against `γ_m`.
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<SummaryStats>> {
    let mut rows = Vec::new();
    let collect = |f: &dyn Fn(&TrialRecord) -> Option<u64>| -> Option<Vec<u64>> {
        records.iter().map(f).collect()
    };
    let with_gof = |mut s: SummaryStats, samples: &[u64], mean: Option<f64>| {
        if let Some(m) = mean {
            if samples.len() >= stats::GOF_MIN_SAMPLES && m > 0.0 {
                s.gof = poisson_gof(samples, m).ok();
            }
        }
        s
    };
    let params = config.params.as_ref();
    let subcritical = config.regime() == Some(Regime::Subcritical);

    if let Some(v) = collect(&|r| r.max_ca_size.map(|x| x as u64)) {
        rows.push(SummaryStats::from_counts("max_ca_size", &v)?);
        let k = params.map(ColorParams::k).unwrap_or(2);
        for l in 2..=k {
            let v = collect(&|r| Some(r.count(l) as u64)).expect("total");
            let beta = if l == k && subcritical {
                params.and_then(|p| theory::beta_top(p).ok())
            } else {
                None
            };
            rows.push(with_gof(SummaryStats::from_counts(format!("N_{l}"), &v)?, &v, beta));
        }
    }
    if let Some(v) = collect(&|r| r.strict_violations.map(|x| x as u64)) {
        rows.push(SummaryStats::from_counts("strict_violations", &v)?);
    }
    if let (Some(p), Some(v)) = (params, collect(&|r| r.census.as_ref().map(|c| c.c2 as u64))) {
        rows.push(with_gof(SummaryStats::from_counts("C_2", &v)?, &v, theory::gamma_m(p, 2).ok()));
        for m in 3..=config.max_cycle_len {
            let v = collect(&|r| Some(r.census.as_ref()?.cycles(m) as u64)).expect("census");
            let gamma = if p.total() < 1.0 { theory::gamma_m(p, m).ok() } else { None };
            rows.push(with_gof(SummaryStats::from_counts(format!("C_{m}"), &v)?, &v, gamma));
        }
        for l in 2..=p.k() {
            let v = collect(&|r| Some(r.census.as_ref()?.separated(l) as u64)).expect("census");
            rows.push(SummaryStats::from_counts(format!("Y_{l}"), &v)?);
        }
        let v = collect(&|r| Some(r.census.as_ref()?.flags.len() as u64)).expect("census");
        rows.push(SummaryStats::from_counts("flagged_components", &v)?);
    }
    if let Some(v) = collect(&|r| r.largest_component.map(|x| x as u64)) {
        rows.push(SummaryStats::from_counts("largest_component", &v)?);
    }
    if let Some(v) = collect(&|r| r.black_max.map(|x| x as u64)) {
        rows.push(SummaryStats::from_counts("black_max", &v)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub_config(trials: usize) -> ExperimentConfig {
        ExperimentConfig::colored(ColorParams::new(&[0.3, 0.3, 0.3]).unwrap(), 2000, trials, 9)
            .with(Measurement::Census)
    }

    #[test]
    fn deterministic_across_threads() {
        let cfg = sub_config(4);
        let a = run_with_threads(&cfg, 1).unwrap();
        let b = run_with_threads(&cfg, 4).unwrap();
        let c = run(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records, c.records);
        let lines_a: Vec<String> = a.records.iter().map(TrialRecord::to_json_line).collect();
        let lines_b: Vec<String> = b.records.iter().map(TrialRecord::to_json_line).collect();
        assert_eq!(lines_a, lines_b);
    }

    #[test]
    fn partition_identity() {
        let out = run(&sub_config(8)).unwrap();
        for r in &out.records {
            let total: usize = r.n_counts.as_ref().unwrap().iter().map(|(l, c)| l * c).sum();
            assert_eq!(total, 2000);
            let max = r.n_counts.as_ref().unwrap().keys().max().copied();
            assert_eq!(r.max_ca_size, max);
        }
        assert!(out.summary.iter().any(|s| s.name == "N_3"));
        assert!(out.summary.iter().any(|s| s.name == "Y_2"));
    }

    #[test]
    fn single_layer_fields() {
        let cfg = ExperimentConfig::single_layer(0.5, 1000, 2, 1).with(Measurement::BlackClusters);
        let mut cfg = cfg;
        cfg.q_black = Some(0.5);
        let out = run(&cfg).unwrap();
        for r in &out.records {
            assert_eq!(r.z_at(1), Some(1000));
            let largest = r.largest_component.unwrap();
            assert_eq!(r.z_at(largest + 1), Some(0));
            assert!(r.z_at(largest).unwrap() >= largest);
            assert!(r.black_max.unwrap() <= largest);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = sub_config(1);
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let mut cfg = sub_config(1);
        cfg.max_cycle_len = 25;
        assert_eq!(cfg.validate(), Err(Error::CycleLenOutOfRange(25)));
        let cfg = ExperimentConfig::colored(ColorParams::new(&[0.5, 0.5]).unwrap(), 1_000_000, 2000, 0);
        assert!(matches!(cfg.validate(), Err(Error::ResourceGuard(..))));
        let cfg = ExperimentConfig::single_layer(0.5, 100, 1, 0).with(Measurement::BlackClusters);
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::single_layer(0.5, 100, 1, 0);
        cfg.measurements.insert(Measurement::Ca);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kv_config() {
        let text = "# subcritical smoke\nlambdas = 0.3,0.3,0.3\nn = 10000\ntrials = 10\nseed = 7\n\
                    max_cycle_len = 12\nmeasurements = ca,census\n";
        let cfg = ExperimentConfig::from_kv_text(text).unwrap();
        assert_eq!(cfg.n, 10_000);
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.max_cycle_len, 12);
        assert!(cfg.measures(Measurement::Census));
        assert!(cfg.validate().is_ok());

        let single = ExperimentConfig::from_kv_text(
            "n = 100\nlambda_single = 0.5\nq_black = 0.5\nmeasurements = black_clusters",
        )
        .unwrap();
        assert!(single.validate().is_ok());

        assert!(ExperimentConfig::from_kv_text("trials = 3").is_err());
        assert!(ExperimentConfig::from_kv_text("n = 10\nbogus = 1").is_err());
        assert!(ExperimentConfig::from_kv_text("n = ten").is_err());
        assert!(ExperimentConfig::from_kv_text("n = 10\nmeasurements = ca,nope").is_err());
    }

    #[test]
    fn census_consistency_flag() {
        let out = run(&sub_config(5)).unwrap();
        for r in &out.records {
            assert!(r.census_consistent(3).is_some());
        }
        let bare = ExperimentConfig::colored(ColorParams::new(&[0.3, 0.3, 0.3]).unwrap(), 100, 1, 0);
        assert_eq!(run(&bare).unwrap().records[0].census_consistent(3), None);
    }
}
