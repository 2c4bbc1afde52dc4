//! Gauss–Hermite rules for expectations over a normal distribution.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// Nodes and weights for `E[f(X)]`, `X ~ N(0, 1)`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch on the probabilists' Hermite recurrence.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("quadrature order must be positive"));
        }
        let mut jacobi = DMatrix::zeros(order, order);
        for k in 1..order {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize against eigensolver noise.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if order % 2 == 1 {
            pairs[order / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// `E[f(mean + sd·X)]`.
    pub fn expect(&self, mean: f64, sd: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mean + sd * x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_normal_moments() {
        let gh = GaussHermite::new(21).unwrap();
        let m = |k: i32| gh.expect(0.0, 1.0, |x| x.powi(k));
        assert!((m(0) - 1.0).abs() < 1e-14);
        assert!(m(1).abs() < 1e-14);
        assert!((m(2) - 1.0).abs() < 1e-13);
        assert!((m(4) - 3.0).abs() < 1e-12);
        assert!((m(10) - 945.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_dephasing_of_a_cosine() {
        // E[cos(s X)] = exp(−s²/2)
        let gh = GaussHermite::new(21).unwrap();
        for s in [0.5, 1.0, 2.0, 3.0] {
            let v = gh.expect(0.0, s, f64::cos);
            assert!((v - (-s * s / 2.0).exp()).abs() < 1e-10, "s {s}: {v}");
        }
    }

    #[test]
    fn single_node_rule() {
        let gh = GaussHermite::new(1).unwrap();
        assert_eq!(gh.nodes, vec![0.0]);
        assert_eq!(gh.weights, vec![1.0]);
        assert!(GaussHermite::new(0).is_err());
    }
}
