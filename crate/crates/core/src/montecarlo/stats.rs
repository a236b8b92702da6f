//! Summary statistics, Poisson goodness of fit and bootstrap intervals.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::seed;

/// Significance level for goodness-of-fit decisions.
pub const GOF_ALPHA: f64 = 0.01;
pub const GOF_MIN_SAMPLES: usize = 500;
pub const GOF_MIN_EXPECTED: f64 = 5.0;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    /// Pooled bins as `(first value, last value or None for the tail, observed, expected)`.
    pub bins: Vec<(u64, Option<u64>, u64, f64)>,
}

impl GofResult {
    pub fn accepts(&self) -> bool {
        self.p_value >= GOF_ALPHA
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub name: String,
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / trials)`.
    pub se: f64,
    pub min: f64,
    pub max: f64,
    /// Value ↦ count, for integer-valued measurements.
    pub distribution: Option<BTreeMap<u64, usize>>,
    pub gof: Option<GofResult>,
}

impl SummaryStats {
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let trials = values.len();
        let mean = values.iter().sum::<f64>() / trials as f64;
        let variance = if trials > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        Ok(SummaryStats {
            name: name.into(),
            trials,
            mean,
            variance,
            se: (variance / trials as f64).sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            distribution: None,
            gof: None,
        })
    }

    pub fn from_counts(name: impl Into<String>, counts: &[u64]) -> Result<Self> {
        let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let mut s = Self::from_values(name, &values)?;
        let mut dist = BTreeMap::new();
        for &c in counts {
            *dist.entry(c).or_insert(0) += 1;
        }
        s.distribution = Some(dist);
        Ok(s)
    }

    /// Mean ± `z` standard errors.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.se, self.mean + z * self.se)
    }

    pub fn csv_row(&self) -> String {
        let p = self.gof.as_ref().map(|g| g.p_value.to_string()).unwrap_or_default();
        format!("{},{},{},{}", self.name, self.mean, self.se, p)
    }
}

pub const SUMMARY_CSV_HEADER: &str = "name,mean,se,p_value";

/// Chi-square test of integer samples against `Poisson(mean)`.
///
/// Bins are `{0}, {1}, …` merged left to right until each expected count is
/// at least 5; the upper tail forms the last bin and is merged into its
/// neighbour when too small. Degrees of freedom are `bins − 1`.
pub fn poisson_gof(samples: &[u64], mean: f64) -> Result<GofResult> {
    if samples.len() < GOF_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            need: GOF_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("Poisson mean must be positive, got {mean}")));
    }
    let total = samples.len() as f64;
    let pois = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;

    // (lo, hi inclusive, expected); the running bin is flushed once it reaches the threshold
    let mut bins: Vec<(u64, u64, f64)> = Vec::new();
    let mut start = 0u64;
    let mut acc = 0.0;
    let mut v = 0u64;
    loop {
        acc += total * pois.pmf(v);
        let tail = total * pois.sf(v);
        if acc >= GOF_MIN_EXPECTED && tail >= GOF_MIN_EXPECTED {
            bins.push((start, v, acc));
            start = v + 1;
            acc = 0.0;
        } else if tail < GOF_MIN_EXPECTED {
            // close with the open tail, folded into the current bin
            bins.push((start, u64::MAX, acc + tail));
            break;
        }
        v += 1;
    }
    if bins.len() > 1 && bins.last().unwrap().2 < GOF_MIN_EXPECTED {
        let (_, hi, e) = bins.pop().unwrap();
        let last = bins.last_mut().unwrap();
        last.1 = hi;
        last.2 += e;
    }
    if bins.len() < 2 {
        return Err(Error::Domain(format!(
            "mean {mean} with {} samples leaves fewer than two bins",
            samples.len()
        )));
    }

    let mut observed = vec![0u64; bins.len()];
    for &s in samples {
        let idx = bins.iter().position(|&(_, hi, _)| s <= hi).expect("last bin is open");
        observed[idx] += 1;
    }
    let statistic: f64 = bins
        .iter()
        .zip(&observed)
        .map(|(&(_, _, e), &o)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = bins.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(GofResult {
        statistic,
        p_value: chi.sf(statistic),
        dof,
        bins: bins
            .iter()
            .zip(&observed)
            .map(|(&(lo, hi, e), &o)| (lo, (hi != u64::MAX).then_some(hi), o, e))
            .collect(),
    })
}

/// Point estimate with a percentile-bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample covariance (divisor `m − 1`).
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len();
    if m < 2 {
        return 0.0;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (m - 1) as f64
}

/// Empirical quantile by nearest rank on sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn percentile_interval(mut stats: Vec<f64>) -> (f64, f64) {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - CI_LEVEL) / 2.0;
    (quantile(&stats, tail), quantile(&stats, 1.0 - tail))
}

/// Bootstrap over paired samples: `statistic` is evaluated on
/// [`BOOTSTRAP_RESAMPLES`] resamples drawn with the stream of `seed`.
pub fn bootstrap<F>(samples: &[(f64, f64)], seed: u64, statistic: F) -> Result<Estimate>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let value = statistic(&xs, &ys);
    let mut rng = seed::rng_from(seed);
    let m = samples.len();
    let mut bx = vec![0.0; m];
    let mut by = vec![0.0; m];
    let stats = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for i in 0..m {
                let j = rng.random_range(0..m);
                bx[i] = xs[j];
                by[i] = ys[j];
            }
            statistic(&bx, &by)
        })
        .collect();
    let (lo, hi) = percentile_interval(stats);
    Ok(Estimate { value, lo, hi })
}

pub fn bootstrap_mean(values: &[f64], seed: u64) -> Result<Estimate> {
    let paired: Vec<(f64, f64)> = values.iter().map(|&v| (v, 0.0)).collect();
    bootstrap(&paired, seed, |xs, _| mean(xs))
}

pub fn covariance_ci(xs: &[f64], ys: &[f64], seed: u64) -> Result<Estimate> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch(xs.len(), ys.len()));
    }
    let paired: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    bootstrap(&paired, seed, covariance)
}
