use serde::{Deserialize, Serialize};

use super::stats::{self, Estimate, SummaryStats};
use super::{run, ExperimentConfig, Measurement, TrialRecord};
use crate::error::{Error, Result};
use crate::params::ColorParams;
use crate::theory::{self, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `n`.
    Linear,
    /// Divide by `log n`.
    Log,
}

impl Normalization {
    pub fn scale(self, n: usize) -> f64 {
        match self {
            Normalization::Linear => n as f64,
            Normalization::Log => (n as f64).ln(),
        }
    }
}

/// Statistics of `max_ca_size / normalization(n)`.
pub fn max_ca_scaling(records: &[TrialRecord], n: usize, norm: Normalization) -> Result<SummaryStats> {
    let scale = norm.scale(n);
    let values: Vec<f64> = records
        .iter()
        .map(|r| r.max_ca_size.map(|m| m as f64 / scale).ok_or(Error::EmptyInput))
        .collect::<Result<_>>()?;
    let name = match norm {
        Normalization::Linear => "max_ca_size/n",
        Normalization::Log => "max_ca_size/log_n",
    };
    SummaryStats::from_values(name, &values)
}

/// Covariance of `(N_ℓ, N_ℓ′)` across trials with a bootstrap interval.
pub fn independence_check(records: &[TrialRecord], pair: (usize, usize), seed: u64) -> Result<Estimate> {
    let (a, b) = pair;
    if a == b {
        return Err(Error::Domain(format!("independence check needs distinct sizes, got {a} twice")));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let xs: Vec<f64> = records.iter().map(|r| r.count(a) as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.count(b) as f64).collect();
    stats::covariance_ci(&xs, &ys, seed)
}

/// Mean of `ℓ · N_ℓ / n` with a bootstrap interval.
pub fn nu_hat(records: &[TrialRecord], n: usize, ell: usize, seed: u64) -> Result<Estimate> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values: Vec<f64> = records
        .iter()
        .map(|r| (ell * r.count(ell)) as f64 / n as f64)
        .collect();
    stats::bootstrap_mean(&values, seed)
}

fn subcritical_single(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("single-layer law needs 0 < lambda < 1, got {lambda}")))
    }
}

/// Trials of a plain `G(n, λ/n)` with component sizes recorded.
pub fn single_layer_trials(n: usize, lambda: f64, trials: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    Ok(run(&ExperimentConfig::single_layer(lambda, n, trials, seed))?.records)
}

/// `max |C(u)| / log n` on a subcritical `G(n, λ/n)`.
pub fn single_layer_max_component(n: usize, lambda: f64, trials: usize, seed: u64) -> Result<SummaryStats> {
    subcritical_single(lambda)?;
    let records = single_layer_trials(n, lambda, trials, seed)?;
    largest_over_log(&records, n)
}

pub fn largest_over_log(records: &[TrialRecord], n: usize) -> Result<SummaryStats> {
    let values: Vec<f64> = records
        .iter()
        .map(|r| r.largest_component.unwrap_or(0) as f64 / (n as f64).ln())
        .collect();
    SummaryStats::from_values("largest_component/log_n", &values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: usize,
    /// Mean over trials of `|{u : |C(u)| > t}| / n`.
    pub empirical: f64,
    pub se: f64,
    /// `e^{−I_λ t}`.
    pub bound: f64,
    /// Empirical exceeds bound by more than 4 standard errors.
    pub violated: bool,
}

/// Compares `P(|C(u)| > t)` with `e^{−I_λ t}` for `t = 1..=t_max`.
pub fn tail_bound_check(records: &[TrialRecord], n: usize, lambda: f64, t_max: usize) -> Result<Vec<TailRow>> {
    subcritical_single(lambda)?;
    let rate = theory::rate_i(lambda)?;
    (1..=t_max)
        .map(|t| {
            let values: Vec<f64> = records
                .iter()
                .map(|r| r.z_at(t + 1).unwrap_or(0) as f64 / n as f64)
                .collect();
            let s = SummaryStats::from_values("tail", &values)?;
            let bound = (-rate * t as f64).exp();
            Ok(TailRow {
                t,
                empirical: s.mean,
                se: s.se,
                bound,
                violated: s.mean > bound + 4.0 * s.se,
            })
        })
        .collect()
}

/// Statistics of `Z_s` across trials.
pub fn cluster_census(records: &[TrialRecord], s: usize) -> Result<SummaryStats> {
    let v: Vec<u64> = records
        .iter()
        .map(|r| r.z_at(s).unwrap_or(0) as u64)
        .collect();
    SummaryStats::from_counts(format!("Z_{s}"), &v)
}

/// `max_C Σ_{v ∈ C} X_v / log n` with i.i.d. Bernoulli(q) marks on `G(n, λ/n)`.
pub fn black_cluster_max(n: usize, lambda: f64, q: f64, trials: usize, seed: u64) -> Result<SummaryStats> {
    subcritical_single(lambda)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("black clusters need 0 < q < 1, got {q}")));
    }
    let mut cfg = ExperimentConfig::single_layer(lambda, n, trials, seed).with(Measurement::BlackClusters);
    cfg.q_black = Some(q);
    let records = run(&cfg)?.records;
    let values: Vec<f64> = records
        .iter()
        .map(|r| r.black_max.unwrap_or(0) as f64 / (n as f64).ln())
        .collect();
    SummaryStats::from_values("black_max/log_n", &values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
    pub fractions: Vec<f64>,
    pub within: usize,
    pub trials: usize,
    pub pass: bool,
}

/// Fraction of trials where `|C_max| / n` lies within `eps` of `μ_λ`;
/// passes at 95%.
pub fn giant_sandwich_check(n: usize, lambda: f64, eps: f64, trials: usize, seed: u64) -> Result<SandwichReport> {
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("giant check needs lambda > 1, got {lambda}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let mu = theory::mu(lambda)?;
    let records = single_layer_trials(n, lambda, trials, seed)?;
    let fractions: Vec<f64> = records
        .iter()
        .map(|r| r.largest_component.unwrap_or(0) as f64 / n as f64)
        .collect();
    let within = fractions.iter().filter(|f| (*f - mu).abs() <= eps).count();
    Ok(SandwichReport {
        lambda,
        mu,
        eps,
        pass: within as f64 >= 0.95 * trials as f64,
        fractions,
        within,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub n: usize,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessTable {
    pub rows: Vec<TightnessRow>,
    /// Some 90% quantile at least doubled between consecutive `n`.
    pub growth: bool,
}

/// Quantiles of the largest CA-component across `ns` at `λ_k^* = 1 > λ_{k−1}^*`.
pub fn critical_tightness(params: &ColorParams, ns: &[usize], trials: usize, seed: u64) -> Result<TightnessTable> {
    let regime = theory::classify_regime(params);
    let star = params.lambda_star();
    if regime != Regime::CriticalBottom || star[star.len() - 2] >= 1.0 {
        return Err(Error::RegimeMismatch {
            expected: "critical-bottom with lambda*_{k-1} < 1".into(),
            actual: regime.to_string(),
        });
    }
    let mut rows = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let cfg = ExperimentConfig::colored(params.clone(), n, trials, crate::seed::split(seed, i as u64));
        let mut sizes: Vec<f64> = run(&cfg)?
            .records
            .iter()
            .map(|r| r.max_ca_size.unwrap_or(0) as f64)
            .collect();
        sizes.sort_by(f64::total_cmp);
        rows.push(TightnessRow {
            n,
            q50: stats::quantile(&sizes, 0.5),
            q90: stats::quantile(&sizes, 0.9),
            q99: stats::quantile(&sizes, 0.99),
            max: *sizes.last().unwrap(),
        });
    }
    let growth = rows.windows(2).any(|w| w[1].q90 >= 2.0 * w[0].q90);
    Ok(TightnessTable { rows, growth })
}
