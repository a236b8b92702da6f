//! Color intensity vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of colors. Color sets are `u32` bitmasks and the
/// subset fixed-point system has `2^k` unknowns.
pub const MAX_COLORS: usize = 20;

/// Edge intensities `λ_1 ≥ … ≥ λ_k` of the `k` color layers.
///
/// The constructor sorts its input non-increasingly; the order the caller
/// supplied is kept in [`ColorParams::input_order`] for echoing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorParams {
    lambdas: Vec<f64>,
    input: Vec<f64>,
}

impl ColorParams {
    pub fn new(lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 colors, got {}",
                lambdas.len()
            )));
        }
        if lambdas.len() > MAX_COLORS {
            return Err(Error::InvalidParams(format!(
                "at most {MAX_COLORS} colors supported, got {}",
                lambdas.len()
            )));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "intensities must be positive and finite, got {bad}"
            )));
        }
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        Ok(ColorParams {
            lambdas: sorted,
            input: lambdas.to_vec(),
        })
    }

    /// Parses a comma separated list such as `1.5,0.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("cannot parse intensity {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&values)
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// Intensities sorted non-increasingly.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn input_order(&self) -> &[f64] {
        &self.input
    }

    /// 0-based access, `lambda(0) = λ_1`.
    pub fn lambda(&self, i: usize) -> f64 {
        self.lambdas[i]
    }

    /// `Λ = λ_1 + … + λ_k`.
    pub fn total(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// `λ_i^* = Λ − λ_i`, non-decreasing in `i`.
    pub fn lambda_star(&self) -> Vec<f64> {
        let total = self.total();
        self.lambdas.iter().map(|l| total - l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_keeps_input() {
        let p = ColorParams::new(&[0.5, 1.5, 1.0]).unwrap();
        assert_eq!(p.lambdas(), &[1.5, 1.0, 0.5]);
        assert_eq!(p.input_order(), &[0.5, 1.5, 1.0]);
        assert_eq!(p.k(), 3);
    }

    #[test]
    fn lambda_star_sums() {
        let p = ColorParams::new(&[0.7, 0.2, 0.4, 0.1]).unwrap();
        let star = p.lambda_star();
        assert!(star.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = star.iter().sum();
        assert!((sum - 3.0 * p.total()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ColorParams::new(&[1.0]).is_err());
        assert!(ColorParams::new(&[1.0, 0.0]).is_err());
        assert!(ColorParams::new(&[1.0, -2.0]).is_err());
        assert!(ColorParams::new(&[1.0, f64::NAN]).is_err());
        assert!(ColorParams::parse("1.0,abc").is_err());
        assert_eq!(ColorParams::parse(" 0.3, 0.3 ,0.3").unwrap().k(), 3);
    }
}
