//! Wigner densities of Gaussian states and their 2-D marginals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::f64::consts::PI;

use super::GaussianState;
use crate::error::{invalid, Error, Result};

const MAX_CONDITION: f64 = 1e12;

/// Normalized Gaussian density with the given moments, guarded against
/// ill-conditioned covariances.
fn gaussian_density(
    op: &'static str,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> Result<impl Fn(&DVector<f64>) -> f64> {
    let eig = SymmetricEigen::new(cov.clone());
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo <= 0.0 || hi / lo > MAX_CONDITION {
        return Err(Error::NumericalDegeneracy {
            op,
            detail: format!(
                "covariance condition number {:.3e} exceeds {MAX_CONDITION:.0e}",
                hi / lo
            ),
        });
    }
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalDegeneracy {
            op,
            detail: "covariance is not positive-definite".into(),
        })?;
    let half_dim = mean.len() as f64 / 2.0;
    let det: f64 = eig.eigenvalues.iter().product();
    let norm = 1.0 / ((2.0 * PI).powf(2.0 * half_dim) * det).sqrt();
    let mean = mean.clone();
    Ok(move |z: &DVector<f64>| {
        let d = z - &mean;
        let q = d.dot(&chol.solve(&d));
        norm * (-0.5 * q).exp()
    })
}

/// Wigner function `W(z)` of the state, normalized to unit integral over all
/// `2N` quadratures.
pub fn wigner_value(state: &GaussianState, point: &[f64]) -> Result<f64> {
    if point.len() != state.mean().len() {
        return Err(invalid(format!(
            "point has {} coordinates, state has {}",
            point.len(),
            state.mean().len()
        )));
    }
    let density = gaussian_density("wigner_value", state.mean(), state.cov())?;
    Ok(density(&DVector::from_column_slice(point)))
}

/// Rectangular evaluation grid for a projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub b_min: f64,
    pub b_max: f64,
    pub b_steps: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, steps: usize) -> Self {
        Self {
            a_min: -half_width,
            a_max: half_width,
            a_steps: steps,
            b_min: -half_width,
            b_max: half_width,
            b_steps: steps,
        }
    }

    fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
        if steps == 1 {
            return vec![0.5 * (min + max)];
        }
        let h = (max - min) / (steps - 1) as f64;
        (0..steps).map(|k| min + k as f64 * h).collect()
    }
}

/// Projected Wigner function sampled on a grid; `values[i][j]` is at
/// `(a_axis[i], b_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub axes: (usize, usize),
    pub a_axis: Vec<f64>,
    pub b_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    /// Trapezoid-free Riemann sum over the grid cells.
    pub fn integral(&self) -> f64 {
        let da = step(&self.a_axis);
        let db = step(&self.b_axis);
        self.values.iter().flatten().sum::<f64>() * da * db
    }
}

fn step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        axis[1] - axis[0]
    }
}

/// Marginal Wigner density over the quadrature pair `axes` (indices into the
/// interleaved `(x̄₁, p̄₁, x̄₂, p̄₂, …)` vector), all other quadratures
/// integrated out.
pub fn wigner_projection(
    state: &GaussianState,
    axes: (usize, usize),
    grid: &GridSpec,
) -> Result<WignerGrid> {
    let dim = state.mean().len();
    let (i, j) = axes;
    if i >= dim || j >= dim || i == j {
        return Err(invalid(format!(
            "projection needs two distinct quadrature indices below {dim}, got ({i}, {j})"
        )));
    }
    if grid.a_steps == 0 || grid.b_steps == 0 {
        return Err(invalid("projection grid needs at least one point per axis"));
    }
    let idx = [i, j];
    let mean = DVector::from_fn(2, |r, _| state.mean()[idx[r]]);
    let cov = DMatrix::from_fn(2, 2, |r, c| state.cov()[(idx[r], idx[c])]);
    let density = gaussian_density("wigner_projection", &mean, &cov)?;
    let a_axis = GridSpec::axis(grid.a_min, grid.a_max, grid.a_steps);
    let b_axis = GridSpec::axis(grid.b_min, grid.b_max, grid.b_steps);
    let values = a_axis
        .iter()
        .map(|&a| {
            b_axis
                .iter()
                .map(|&b| density(&DVector::from_column_slice(&[a, b])))
                .collect()
        })
        .collect();
    Ok(WignerGrid {
        axes,
        a_axis,
        b_axis,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SqueezeParams;
    use nalgebra::DMatrix;

    #[test]
    fn vacuum_peak_value() {
        let v = GaussianState::vacuum(1).unwrap();
        let w = wigner_value(&v, &[0.0, 0.0]).unwrap();
        assert!((w - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn squeezing_preserves_peak() {
        let s = GaussianState::vacuum(1)
            .unwrap()
            .apply_squeeze(0, SqueezeParams::new(1.0, 0.0).unwrap())
            .unwrap();
        let w = wigner_value(&s, &[0.0, 0.0]).unwrap();
        assert!((w - 2.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn peak_is_inverse_root_determinant() {
        let s = GaussianState::thermal(2, 0.4)
            .unwrap()
            .apply_squeeze(1, SqueezeParams::new(0.6, 0.3).unwrap())
            .unwrap()
            .apply_beam_splitter_50_50(0, 1)
            .unwrap();
        let mean: Vec<f64> = s.mean().iter().copied().collect();
        let expected = 1.0 / ((2.0 * PI).powi(2) * s.cov().determinant().sqrt());
        assert!((wigner_value(&s, &mean).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_covariance_is_reported() {
        // condition number 1e14, beyond the guard; built directly since it is
        // still a legal state.
        let s = GaussianState::vacuum(1)
            .unwrap()
            .apply_squeeze(0, SqueezeParams::new(16.2, 0.0).unwrap())
            .unwrap();
        assert!(matches!(
            wigner_value(&s, &[0.0, 0.0]),
            Err(Error::NumericalDegeneracy { .. })
        ));
        let g = GaussianState::vacuum(1).unwrap();
        assert!(wigner_value(&g, &[0.0]).is_err());
        let _ = DMatrix::<f64>::zeros(1, 1);
    }

    #[test]
    fn vacuum_projection_normalizes() {
        let v = GaussianState::vacuum(2).unwrap();
        // 1/2 standard deviation, grid spans ±4σ = 8σ total
        let g = wigner_projection(&v, (0, 1), &GridSpec::square(2.0, 101)).unwrap();
        assert!((g.integral() - 1.0).abs() < 0.01);
        let c = g.values[50][50];
        assert!((c - 2.0 / PI).abs() < 1e-12);
        // isotropic: σ = 1/2 on both axes
        assert!((g.values[60][50] - g.values[50][60]).abs() < 1e-15);
        assert!(wigner_projection(&v, (1, 1), &GridSpec::square(1.0, 3)).is_err());
        assert!(wigner_projection(&v, (0, 4), &GridSpec::square(1.0, 3)).is_err());
    }
}
