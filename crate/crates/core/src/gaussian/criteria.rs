//! Inseparability and steering figures of merit.
//!
//! Both criteria are evaluated on the EPR-correlated pair `u = x̄a − x̄b`,
//! `v = p̄a + p̄b`. These two commute, so both can be squeezed at once; the
//! difference pair `(x̄a − x̄b, p̄a − p̄b)` obeys `Δu·Δv ≥ 1/2` for every state
//! and cannot witness anything.

use super::{pair_momentum_uncertainties, GaussianState};
use crate::error::Result;
use std::f64::consts::FRAC_PI_2;

/// Duan–Simon separable bound in the vacuum-variance-1/4 convention.
pub const SEPARABLE_BOUND: f64 = 1.0;

/// Steering threshold for the product of the two EPR standard deviations.
pub const EPR_THRESHOLD: f64 = 0.25;

fn epr_variances(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<(f64, f64)> {
    state.check_pair(mode_a, mode_b)?;
    let dim = 2 * state.mode_count();
    let mut u = vec![0.0; dim];
    u[2 * mode_a] = 1.0;
    u[2 * mode_b] = -1.0;
    let mut v = vec![0.0; dim];
    v[2 * mode_a + 1] = 1.0;
    v[2 * mode_b + 1] = 1.0;
    Ok((
        state.combination_variance(&u),
        state.combination_variance(&v),
    ))
}

/// `Δ²(x̄a − x̄b) + Δ²(p̄a + p̄b)`; below 1 certifies inseparability.
pub fn duan_simon_value(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<f64> {
    let (vu, vv) = epr_variances(state, mode_a, mode_b)?;
    Ok(vu + vv)
}

/// `Δ(x̄a − x̄b) · Δ(p̄a + p̄b)`; below 1/4 certifies steering.
pub fn epr_product(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<f64> {
    let (vu, vv) = epr_variances(state, mode_a, mode_b)?;
    Ok((vu * vv).sqrt())
}

/// Operational surrogate built from two momentum measurements a quarter period
/// apart: `Δ(p̄x′−p̄y′)|θx=π/2 · Δ(p̄x′+p̄y′)|θx=0`.
pub fn epr_surrogate(r: f64) -> f64 {
    pair_momentum_uncertainties(r, FRAC_PI_2).diff * pair_momentum_uncertainties(r, 0.0).sum
}
