//! Exact Gaussian-state engine.
//!
//! States are stored as a mean vector and covariance matrix over the
//! interleaved quadratures `(x̄₁, p̄₁, x̄₂, p̄₂, …)`. Vacuum variance is 1/4.
//! Every transform is a symplectic map `S` acting as `mean ↦ S·mean`,
//! `cov ↦ S·cov·Sᵀ`; states are immutable and transforms return new values.

mod criteria;
mod formulas;
mod wigner;

pub use criteria::{duan_simon_value, epr_product, epr_surrogate, EPR_THRESHOLD, SEPARABLE_BOUND};
pub use formulas::{
    output_momentum_width, pair_momentum_uncertainties, single_mode_width_vs_time, squeezing_db,
    PairUncertainties,
};
pub use wigner::{wigner_projection, wigner_value, GridSpec, WignerGrid};

use nalgebra::{Complex, DMatrix, DVector, Matrix2, SymmetricEigen};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};

/// Variance of either quadrature in the ground state.
pub const VACUUM_VARIANCE: f64 = 0.25;

const SYMMETRY_TOL: f64 = 1e-12;
const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Squeezing amplitude and phase, ξ = r·e^{i2θ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid(format!(
                "squeezing amplitude must be >= 0, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(invalid("squeezing phase must be finite"));
        }
        Ok(Self {
            r,
            theta: theta.rem_euclid(TAU),
        })
    }

    /// Squeezing with signed amplitude: a negative `r` squeezes the conjugate
    /// quadrature, i.e. `(|r|, θ + π/2)`.
    pub fn signed(r: f64, theta: f64) -> Result<Self> {
        if r < 0.0 {
            Self::new(-r, theta + std::f64::consts::FRAC_PI_2)
        } else {
            Self::new(r, theta)
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Phase-space matrix acting on `(x̄, p̄)`, obtained from
    /// `A = a cosh r − e^{i2θ} a† sinh r` with `a = x̄ + i p̄`.
    pub fn matrix(&self) -> Matrix2<f64> {
        let (c, s) = (self.r.cosh(), self.r.sinh());
        let (sin2, cos2) = (2.0 * self.theta).sin_cos();
        Matrix2::new(c - s * cos2, -s * sin2, -s * sin2, c + s * cos2)
    }
}

/// Free-evolution matrix: `x̄ ↦ x̄ cos φ + p̄ sin φ`, `p̄ ↦ −x̄ sin φ + p̄ cos φ`.
pub fn rotation_matrix(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Mean and covariance of `N` bosonic modes in dimensionless quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Ground state of `n_modes` oscillators.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        Self::thermal(n_modes, 0.0)
    }

    /// Thermal state with mean occupation `nbar` in every mode.
    pub fn thermal(n_modes: usize, nbar: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("a state needs at least one mode"));
        }
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(invalid(format!("mean occupation must be >= 0, got {nbar}")));
        }
        let dim = 2 * n_modes;
        Ok(Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::from_diagonal_element(dim, dim, (2.0 * nbar + 1.0) * VACUUM_VARIANCE),
        })
    }

    /// Builds a state from raw moments, checking symmetry, positivity and the
    /// uncertainty principle.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(invalid(format!(
                "mean length must be a positive even number, got {dim}"
            )));
        }
        if cov.shape() != (dim, dim) {
            return Err(invalid(format!(
                "covariance shape {:?} does not match mean length {dim}",
                cov.shape()
            )));
        }
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL {
            return Err(invalid("covariance is not symmetric"));
        }
        if cov.clone().cholesky().is_none() {
            return Err(invalid("covariance is not positive-definite"));
        }
        let state = Self { mean, cov };
        let nu_min = state
            .symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if nu_min < VACUUM_VARIANCE - ADMISSIBILITY_TOL {
            return Err(invalid(format!(
                "covariance violates the uncertainty principle (symplectic eigenvalue {nu_min})"
            )));
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Variance of the linear combination `Σ cᵢ zᵢ` of quadratures.
    pub fn combination_variance(&self, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.mean.len());
        let c = DVector::from_column_slice(coeffs);
        (c.transpose() * &self.cov * &c)[(0, 0)]
    }

    pub fn x_variance(&self, mode: usize) -> f64 {
        self.cov[(2 * mode, 2 * mode)]
    }

    pub fn p_variance(&self, mode: usize) -> f64 {
        self.cov[(2 * mode + 1, 2 * mode + 1)]
    }

    /// The 2×2 covariance block of one mode.
    pub fn mode_block(&self, mode: usize) -> Matrix2<f64> {
        let i = 2 * mode;
        Matrix2::new(
            self.cov[(i, i)],
            self.cov[(i, i + 1)],
            self.cov[(i + 1, i)],
            self.cov[(i + 1, i + 1)],
        )
    }

    /// The 2×2 cross-covariance block `⟨z_a z_bᵀ⟩`.
    pub fn cross_block(&self, mode_a: usize, mode_b: usize) -> Matrix2<f64> {
        let (i, j) = (2 * mode_a, 2 * mode_b);
        Matrix2::new(
            self.cov[(i, j)],
            self.cov[(i, j + 1)],
            self.cov[(i + 1, j)],
            self.cov[(i + 1, j + 1)],
        )
    }

    /// Reduced single-mode state.
    pub fn reduced(&self, mode: usize) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let b = self.mode_block(mode);
        Ok(GaussianState {
            mean: DVector::from_column_slice(&[self.mean[2 * mode], self.mean[2 * mode + 1]]),
            cov: DMatrix::from_column_slice(2, 2, b.as_slice()),
        })
    }

    /// Symplectic eigenvalues, ascending; one per mode.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.mode_count();
        let dim = 2 * n;
        let eig = SymmetricEigen::new(self.cov.clone());
        let sqrt_cov = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let omega = symplectic_form(n);
        let m = &sqrt_cov * omega * &sqrt_cov;
        // i·m is Hermitian with eigenvalues ±ν.
        let herm = DMatrix::from_fn(dim, dim, |r, c| {
            Complex::new(0.0, 0.5 * (m[(r, c)] - m[(c, r)]))
        });
        let mut vals: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .map(|v| v.abs())
            .collect();
        vals.sort_by(f64::total_cmp);
        (0..dim)
            .step_by(2)
            .map(|k| 0.5 * (vals[k] + vals[k + 1]))
            .collect()
    }

    pub fn apply_squeeze(&self, mode: usize, params: SqueezeParams) -> Result<GaussianState> {
        self.check_mode(mode)?;
        Ok(self.apply_local(mode, &params.matrix()))
    }

    pub fn apply_rotation(&self, mode: usize, phi: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        Ok(self.apply_local(mode, &rotation_matrix(phi)))
    }

    /// The 45° virtual beam splitter:
    /// `z_a′ = (z_a + z_b)/√2`, `z_b′ = (−z_a + z_b)/√2` for both quadratures.
    pub fn apply_beam_splitter_50_50(&self, mode_a: usize, mode_b: usize) -> Result<GaussianState> {
        self.apply_beam_splitter(mode_a, mode_b, std::f64::consts::FRAC_PI_4)
    }

    pub(crate) fn apply_beam_splitter(
        &self,
        mode_a: usize,
        mode_b: usize,
        angle: f64,
    ) -> Result<GaussianState> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(invalid("beam splitter needs two distinct modes"));
        }
        let (s, c) = angle.sin_cos();
        let mut map = DMatrix::identity(self.mean.len(), self.mean.len());
        for q in 0..2 {
            let (ia, ib) = (2 * mode_a + q, 2 * mode_b + q);
            map[(ia, ia)] = c;
            map[(ia, ib)] = s;
            map[(ib, ia)] = -s;
            map[(ib, ib)] = c;
        }
        Ok(self.apply_symplectic(&map))
    }

    /// Applies an arbitrary full-size phase-space map.
    pub fn apply_symplectic(&self, map: &DMatrix<f64>) -> GaussianState {
        let cov = map * &self.cov * map.transpose();
        GaussianState {
            mean: map * &self.mean,
            cov: (&cov + cov.transpose()) * 0.5,
        }
    }

    fn apply_local(&self, mode: usize, local: &Matrix2<f64>) -> GaussianState {
        let mut map = DMatrix::identity(self.mean.len(), self.mean.len());
        let i = 2 * mode;
        for r in 0..2 {
            for c in 0..2 {
                map[(i + r, i + c)] = local[(r, c)];
            }
        }
        self.apply_symplectic(&map)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count() {
            return Err(invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.mode_count()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_pair(&self, mode_a: usize, mode_b: usize) -> Result<()> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::InvalidArgument(
                "criteria need two distinct modes".into(),
            ));
        }
        Ok(())
    }
}

/// Block-diagonal symplectic form for `n` modes in `(x, p)` ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}
