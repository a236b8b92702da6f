//! Limit constants: rate functions, the black-cluster exponent, branching
//! process survival, the linear and logarithmic constants, Poisson means.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ColorSet;
use crate::params::ColorParams;

/// `I_λ = λ − 1 − log λ`.
pub fn rate_i(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("rate_i needs lambda > 0, got {lambda}")));
    }
    Ok(lambda - 1.0 - lambda.ln())
}

/// Binomial rate `J_q(x) = x log(x/q) + (1−x) log((1−x)/(1−q))`, extended
/// continuously by `J_q(1) = log(1/q)`.
pub fn entropy_j(q: f64, x: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("entropy_j needs 0 < q < 1, got {q}")));
    }
    if !(x >= q && x <= 1.0) {
        return Err(Error::Domain(format!("entropy_j needs q <= x <= 1, got x = {x}")));
    }
    Ok(j_unchecked(q, x))
}

fn j_unchecked(q: f64, x: f64) -> f64 {
    let head = x * (x / q).ln();
    if x >= 1.0 {
        head
    } else {
        head + (1.0 - x) * ((1.0 - x) / (1.0 - q)).ln()
    }
}

/// Minimizer of `x ↦ (I_λ + J_q(x)) / x` over `[q, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoMin {
    pub value: f64,
    pub argmin: f64,
}

const RHO_GRID_STEP: f64 = 1e-3;

/// `ρ(q, λ) = inf_{x ∈ [q,1]} (I_λ + J_q(x)) / x`.
///
/// A grid of step `1e-3` locates the global minimum, then golden-section
/// search refines it inside the neighbouring grid cells.
pub fn rho(q: f64, lambda: f64) -> Result<RhoMin> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("rho needs 0 < q < 1, got {q}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("rho needs 0 < lambda < 1, got {lambda}")));
    }
    let energy = rate_i(lambda)?;
    let f = |x: f64| (energy + j_unchecked(q, x)) / x;

    let steps = ((1.0 - q) / RHO_GRID_STEP).ceil() as usize;
    let grid = |j: usize| (q + j as f64 * RHO_GRID_STEP).min(1.0);
    let (mut best_x, mut best_f) = (q, f(q));
    for j in 1..=steps {
        let x = grid(j);
        let fx = f(x);
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }

    let (mut lo, mut hi) = ((best_x - RHO_GRID_STEP).max(q), (best_x + RHO_GRID_STEP).min(1.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    for x in [c, d, lo, hi] {
        let fx = f(x);
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    Ok(RhoMin {
        value: best_f,
        argmin: best_x,
    })
}

/// `a(q, λ) = 1 / ρ(q, λ)`.
pub fn a_of(q: f64, lambda: f64) -> Result<f64> {
    Ok(1.0 / rho(q, lambda)?.value)
}

/// Survival probability of a Poisson(λ) branching process: the root of
/// `t = 1 − e^{−λt}` in `(0, 1)` for `λ > 1`, and `0` for `λ ≤ 1`.
pub fn mu(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("mu needs lambda > 0, got {lambda}")));
    }
    if lambda <= 1.0 {
        return Ok(0.0);
    }
    // 1 − e^{−λt} − t is concave, zero at 0, positive up to the root.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - (-lambda * mid).exp() - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solution of the subset-extinction system on the colored Poisson tree.
///
/// `x[S]` (indexed by color bitmask, 0-based colors) is the probability that
/// the root's component avoiding color `i` is finite for every `i ∈ S`. It is
/// the minimal solution of
/// `x_S = exp(Σ_j λ_j (x_{S∖{j}} − 1))`, `x_∅ = 1`,
/// reached by iterating from `x_S = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFixedPoint {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Every iterate was coordinatewise at least the previous one.
    pub monotone: bool,
}

pub const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 1_000_000;

impl SubsetFixedPoint {
    pub fn solve(params: &ColorParams) -> Self {
        let k = params.k();
        let lambdas = params.lambdas();
        let size = 1usize << k;
        let mut x = vec![0.0; size];
        x[0] = 1.0;
        let mut next = x.clone();
        let mut monotone = true;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < FIXED_POINT_MAX_ITER {
            iterations += 1;
            let mut delta = 0.0f64;
            for s in 1..size {
                let exponent: f64 = lambdas
                    .iter()
                    .enumerate()
                    .map(|(j, l)| l * (x[s & !(1 << j)] - 1.0))
                    .sum();
                next[s] = exponent.exp();
                if next[s] < x[s] {
                    monotone = false;
                }
                delta = delta.max((next[s] - x[s]).abs());
            }
            std::mem::swap(&mut x, &mut next);
            if delta < FIXED_POINT_TOL {
                converged = true;
                break;
            }
        }
        SubsetFixedPoint {
            x,
            iterations,
            converged,
            monotone,
        }
    }

    pub fn k(&self) -> usize {
        self.x.len().trailing_zeros() as usize
    }

    pub fn get(&self, set: ColorSet) -> f64 {
        self.x[set.0 as usize]
    }

    /// `Σ_S (−1)^{|S|} x_S`: probability that every avoided component of
    /// the root is infinite.
    pub fn all_infinite(&self) -> f64 {
        self.x
            .iter()
            .enumerate()
            .map(|(s, v)| if s.count_ones() % 2 == 0 { *v } else { -v })
            .sum()
    }
}

/// Limit of `max |C̃(u)| / n`.
///
/// Positive exactly when `λ_1^* > 1`; below that threshold it is `0`.
/// Otherwise computed from [`SubsetFixedPoint`] by inclusion–exclusion and
/// clamped to `[0, 1]` against rounding.
pub fn a1(params: &ColorParams) -> f64 {
    if params.lambda_star()[0] <= 1.0 {
        return 0.0;
    }
    SubsetFixedPoint::solve(params).all_infinite().clamp(0.0, 1.0)
}

/// Limit of `max |C̃(u)| / log n` when `λ_k^* > 1 > λ_{k−1}^*`:
/// `a(μ(λ_k^*), λ_k)`.
pub fn a2(params: &ColorParams) -> Result<f64> {
    let regime = classify_regime(params);
    if regime != Regime::IntermediateStrict {
        return Err(Error::RegimeMismatch {
            expected: Regime::IntermediateStrict.to_string(),
            actual: regime.to_string(),
        });
    }
    let k = params.k();
    let q = mu(params.lambda_star()[k - 1])?;
    a_of(q, params.lambda(k - 1))
}

/// Poisson mean of `N_k`: `(k−1)!/2 · Π λ_i/(1−λ_i)`, plus `γ_2` when `k = 2`.
pub fn beta_top(params: &ColorParams) -> Result<f64> {
    if let Some(l) = params.lambdas().iter().find(|&&l| l >= 1.0) {
        return Err(Error::Domain(format!(
            "beta_top needs every lambda < 1, got {l}"
        )));
    }
    let regime = classify_regime(params);
    if regime != Regime::Subcritical {
        return Err(Error::RegimeMismatch {
            expected: Regime::Subcritical.to_string(),
            actual: regime.to_string(),
        });
    }
    let k = params.k();
    let factorial: f64 = (1..k).map(|i| i as f64).product();
    let product: f64 = params.lambdas().iter().map(|l| l / (1.0 - l)).product();
    let beta = factorial / 2.0 * product;
    Ok(if k == 2 { beta + gamma_m(params, 2)? } else { beta })
}

/// Poisson limit of the cycle counts: `γ_2 = ½ Σ_{i<j} λ_i λ_j` for repeated
/// edges and `γ_m = Λ^m / (2m)` for cycles of length `m ≥ 3`.
pub fn gamma_m(params: &ColorParams, m: usize) -> Result<f64> {
    match m {
        0 | 1 => Err(Error::Domain(format!("gamma_m needs m >= 2, got {m}"))),
        2 => {
            let l = params.lambdas();
            let mut sum = 0.0;
            for i in 0..l.len() {
                for j in i + 1..l.len() {
                    sum += l[i] * l[j];
                }
            }
            Ok(0.5 * sum)
        }
        _ => Ok(params.total().powi(m as i32) / (2.0 * m as f64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `λ_1^* > 1`.
    Supercritical,
    /// `λ_1^* = 1`.
    CriticalTop,
    /// `λ_k^* > 1` and `λ_{k−1}^* ≥ 1 > λ_1^*`.
    Intermediate,
    /// `λ_k^* > 1 > λ_{k−1}^*`.
    IntermediateStrict,
    /// `λ_k^* = 1 > λ_1^*`.
    CriticalBottom,
    /// `λ_k^* < 1`.
    Subcritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Supercritical => "supercritical",
            Regime::CriticalTop => "critical-top",
            Regime::Intermediate => "intermediate",
            Regime::IntermediateStrict => "intermediate-strict",
            Regime::CriticalBottom => "critical-bottom",
            Regime::Subcritical => "subcritical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact comparisons against 1, no tolerance.
pub fn classify_regime(params: &ColorParams) -> Regime {
    let star = params.lambda_star();
    let k = star.len();
    let (bottom, top) = (star[0], star[k - 1]);
    if bottom > 1.0 {
        Regime::Supercritical
    } else if bottom == 1.0 {
        Regime::CriticalTop
    } else if top < 1.0 {
        Regime::Subcritical
    } else if top == 1.0 {
        Regime::CriticalBottom
    } else if star[k - 2] < 1.0 {
        Regime::IntermediateStrict
    } else {
        Regime::Intermediate
    }
}

/// Every limit quantity for one parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub regime: Regime,
    pub lambdas: Vec<f64>,
    pub lambda_star: Vec<f64>,
    pub total: f64,
    /// `I_{λ_i}`.
    pub rate_i: Vec<f64>,
    /// `I_{λ_i^*}`.
    pub rate_i_star: Vec<f64>,
    /// `μ(λ_i^*)`.
    pub mu_star: Vec<f64>,
    pub a1: f64,
    /// Keyed by the 1-based color set, e.g. `"{1,2}"`.
    pub subset_fixed_points: BTreeMap<String, f64>,
    pub fixed_point_converged: bool,
    pub a2: Option<f64>,
    pub beta_k: Option<f64>,
    /// `m ↦ γ_m` for `2 ≤ m ≤ max_cycle_len`, subcritical only.
    pub gamma: Option<BTreeMap<usize, f64>>,
    pub rho: Option<RhoQuery>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoQuery {
    pub q: f64,
    pub lambda: f64,
    pub rho: f64,
    pub argmin: f64,
    pub a: f64,
}

impl TheoryConstants {
    pub fn compute(
        params: &ColorParams,
        max_cycle_len: usize,
        rho_query: Option<(f64, f64)>,
    ) -> Result<Self> {
        let regime = classify_regime(params);
        let star = params.lambda_star();
        let system = SubsetFixedPoint::solve(params);
        let subset_fixed_points = system
            .x
            .iter()
            .enumerate()
            .map(|(s, &v)| {
                let names: Vec<String> = ColorSet(s as u32).iter().map(|c| (c + 1).to_string()).collect();
                (format!("{{{}}}", names.join(",")), v)
            })
            .collect();
        let subcritical = regime == Regime::Subcritical;
        let gamma = if subcritical {
            Some(
                (2..=max_cycle_len.max(2))
                    .map(|m| Ok((m, gamma_m(params, m)?)))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };
        let rho = rho_query
            .map(|(q, lambda)| {
                let r = rho(q, lambda)?;
                Ok::<_, Error>(RhoQuery {
                    q,
                    lambda,
                    rho: r.value,
                    argmin: r.argmin,
                    a: 1.0 / r.value,
                })
            })
            .transpose()?;
        Ok(TheoryConstants {
            regime,
            lambdas: params.lambdas().to_vec(),
            total: params.total(),
            rate_i: params.lambdas().iter().map(|&l| rate_i(l)).collect::<Result<_>>()?,
            rate_i_star: star.iter().map(|&l| rate_i(l)).collect::<Result<_>>()?,
            mu_star: star.iter().map(|&l| mu(l)).collect::<Result<_>>()?,
            lambda_star: star,
            a1: a1(params),
            subset_fixed_points,
            fixed_point_converged: system.converged,
            a2: if regime == Regime::IntermediateStrict { Some(a2(params)?) } else { None },
            beta_k: if subcritical { Some(beta_top(params)?) } else { None },
            gamma,
            rho,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: &[f64]) -> ColorParams {
        ColorParams::new(l).unwrap()
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate_i(1.0).unwrap(), 0.0);
        assert!((rate_i(0.5).unwrap() - (2f64.ln() - 0.5)).abs() < 1e-15);
        assert!((rate_i(2.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!(rate_i(0.0).is_err());
        assert!(rate_i(0.7).unwrap() > 0.0 && rate_i(1.3).unwrap() > 0.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_j(0.3, 0.3).unwrap(), 0.0);
        assert!((entropy_j(0.5, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let expected = 0.6 * 2f64.ln() + 0.4 * (4.0f64 / 7.0).ln();
        assert!((entropy_j(0.3, 0.6).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.192042).abs() < 1e-6);
        // continuity at 1
        assert!((entropy_j(0.4, 1.0 - 1e-12).unwrap() - entropy_j(0.4, 1.0).unwrap()).abs() < 1e-9);
        assert!(entropy_j(0.0, 0.5).is_err());
        assert!(entropy_j(0.5, 0.4).is_err());
        assert!(entropy_j(0.5, 1.1).is_err());
    }

    #[test]
    fn rho_domain() {
        assert!(rho(0.0, 0.5).is_err());
        assert!(rho(0.5, 1.0).is_err());
        assert!(rho(1.0, 0.5).is_err());
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(1.0).unwrap(), 0.0);
        assert_eq!(mu(0.4).unwrap(), 0.0);
        assert!(mu(-1.0).is_err());
        for l in [1.2, 1.5, 2.0, 4.0] {
            let t = mu(l).unwrap();
            assert!((t - (1.0 - (-l * t).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_values() {
        let sub = p(&[0.3, 0.3, 0.3]);
        assert!((gamma_m(&sub, 2).unwrap() - 0.135).abs() < 1e-12);
        assert!((gamma_m(&sub, 3).unwrap() - 0.1215).abs() < 1e-12);
        assert!((gamma_m(&sub, 4).unwrap() - 0.9f64.powi(4) / 8.0).abs() < 1e-12);
        assert!(gamma_m(&sub, 1).is_err());
    }

    #[test]
    fn beta_values() {
        let b3 = beta_top(&p(&[0.3, 0.3, 0.3])).unwrap();
        assert!((b3 - (3.0f64 / 7.0).powi(3)).abs() < 1e-12);
        let b2 = beta_top(&p(&[0.4, 0.4])).unwrap();
        assert!((b2 - (0.08 + 0.5 * (2.0f64 / 3.0).powi(2))).abs() < 1e-12);
        assert!(matches!(beta_top(&p(&[0.4, 1.0])), Err(Error::Domain(_))));
        assert!(matches!(beta_top(&p(&[0.9, 0.9, 0.9])), Err(Error::RegimeMismatch { .. })));
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&p(&[0.3, 0.3, 0.3])), Regime::Subcritical);
        assert_eq!(classify_regime(&p(&[1.5, 1.5])), Regime::Supercritical);
        assert_eq!(classify_regime(&p(&[1.5, 0.5])), Regime::IntermediateStrict);
        assert_eq!(classify_regime(&p(&[1.0, 0.5])), Regime::CriticalBottom);
        assert_eq!(classify_regime(&p(&[1.0, 1.0])), Regime::CriticalTop);
        // λ* = (0.9, 1.1, 1.1): two avoided views supercritical
        assert_eq!(classify_regime(&p(&[0.65, 0.45, 0.45])), Regime::Intermediate);
        assert_eq!(classify_regime(&p(&[0.05, 0.6, 0.5])), Regime::IntermediateStrict);
        assert_eq!(Regime::IntermediateStrict.to_string(), "intermediate-strict");
    }

    #[test]
    fn a2_regime_guard() {
        assert!(matches!(a2(&p(&[1.2, 1.1])), Err(Error::RegimeMismatch { .. })));
    }

    #[test]
    fn fixed_point_structure() {
        let sys = SubsetFixedPoint::solve(&p(&[1.5, 1.5]));
        assert!(sys.converged && sys.monotone);
        assert_eq!(sys.k(), 2);
        assert_eq!(sys.get(ColorSet::EMPTY), 1.0);
        assert!(sys.get(ColorSet::from_colors([0, 1])) <= sys.get(ColorSet::single(0)));
    }

    #[test]
    fn constants_bundle() {
        let c = TheoryConstants::compute(&p(&[0.3, 0.3, 0.3]), 6, Some((0.5, 0.5))).unwrap();
        assert_eq!(c.regime, Regime::Subcritical);
        assert!(c.a2.is_none() && c.beta_k.is_some());
        assert_eq!(c.gamma.as_ref().unwrap().len(), 5);
        assert_eq!(c.subset_fixed_points.len(), 8);
        assert!(c.subset_fixed_points.contains_key("{1,3}"));
        assert!(c.rho.is_some());
        let c = TheoryConstants::compute(&p(&[1.5, 0.5]), 16, None).unwrap();
        assert!(c.a2.is_some() && c.beta_k.is_none() && c.gamma.is_none());
    }
}
