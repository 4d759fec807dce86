use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the product ensemble: `M` independent truncations of
/// Haar-unitary matrices of sizes `(N + L_j) x (N + L_j)` down to `N x N`,
/// multiplied together.
///
/// `L_j >= 1` is required throughout; `L = 0` would reduce a factor to a full
/// Haar unitary and is rejected at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleParams {
    n: usize,
    truncations: Vec<usize>,
}

impl EnsembleParams {
    pub fn new(n: usize, truncations: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("matrix size N must be at least 1".into()));
        }
        if truncations.is_empty() {
            return Err(Error::Config("at least one factor (M >= 1) is required".into()));
        }
        if truncations.iter().any(|&l| l == 0) {
            return Err(Error::Config(
                "every truncation L_j must be at least 1 (L = 0 is a full Haar unitary)".into(),
            ));
        }
        Ok(Self { n, truncations })
    }

    /// Equal-truncation ensemble: `M` factors, all with the same `L`.
    pub fn equal(n: usize, m: usize, l: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("number of factors M must be at least 1".into()));
        }
        Self::new(n, vec![l; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of factors `M` in the product.
    pub fn num_factors(&self) -> usize {
        self.truncations.len()
    }

    pub fn truncations(&self) -> &[usize] {
        &self.truncations
    }

    pub fn sum_l(&self) -> usize {
        self.truncations.iter().sum()
    }

    pub fn max_l(&self) -> usize {
        *self.truncations.iter().max().expect("at least one factor")
    }

    /// True when all truncations agree.
    pub fn equal_l(&self) -> bool {
        self.truncations.windows(2).all(|w| w[0] == w[1])
    }

    /// The common truncation, when `equal_l` holds.
    pub fn common_l(&self) -> Option<usize> {
        if self.equal_l() {
            Some(self.truncations[0])
        } else {
            None
        }
    }

    /// `mu = N / (N + L)`, defined only for equal truncations.
    pub fn mu(&self) -> Option<f64> {
        self.common_l().map(|l| self.n as f64 / (self.n + l) as f64)
    }

    /// `alpha = L / N`, defined only for equal truncations.
    pub fn alpha(&self) -> Option<f64> {
        self.common_l().map(|l| l as f64 / self.n as f64)
    }
}

impl std::fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ls: Vec<String> = self.truncations.iter().map(|l| l.to_string()).collect();
        write!(f, "N={} M={} L=[{}]", self.n, self.num_factors(), ls.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(EnsembleParams::new(0, vec![1]).is_err());
        assert!(EnsembleParams::new(3, vec![]).is_err());
        assert!(EnsembleParams::new(3, vec![2, 0]).is_err());
        assert!(EnsembleParams::equal(3, 0, 2).is_err());
    }

    #[test]
    fn derived_ratios() {
        let p = EnsembleParams::equal(20, 2, 3).unwrap();
        assert!(p.equal_l());
        assert_eq!(p.common_l(), Some(3));
        assert!((p.mu().unwrap() - 20.0 / 23.0).abs() < 1e-15);
        assert!((p.alpha().unwrap() - 0.15).abs() < 1e-15);

        let q = EnsembleParams::new(5, vec![1, 2, 3]).unwrap();
        assert!(!q.equal_l());
        assert_eq!(q.mu(), None);
        assert_eq!(q.sum_l(), 6);
        assert_eq!(q.max_l(), 3);
    }

    #[test]
    fn mu_in_open_unit_interval() {
        for n in 1..40 {
            for l in 1..40 {
                let p = EnsembleParams::equal(n, 1, l).unwrap();
                let mu = p.mu().unwrap();
                assert!(mu > 0.0 && mu < 1.0);
                assert!(p.alpha().unwrap() > 0.0);
            }
        }
    }
}
