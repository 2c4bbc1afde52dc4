//! Two-mode squeezing of an imperfectly cooled input: each input pair
//! `|l_x, l_y⟩` carries the product Boltzmann weight
//! `(1+n̄₀)^{-2} (n̄₀/(1+n̄₀))^{l_x+l_y}`.

use super::{s2_matrix_element_sq, FockDistribution};
use crate::error::{invalid, Result};

/// Default cap on `l_x + l_y` in the Boltzmann sum.
pub const DEFAULT_L_CAP: usize = 50;

/// Neglected Boltzmann weight above which a warning is attached.
const CAP_WARNING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeSqueezeOp {
    r: f64,
    theta0: f64,
    l_cap: usize,
}

impl TwoModeSqueezeOp {
    pub fn new(r: f64, theta0: f64) -> Result<Self> {
        Self::with_cap(r, theta0, DEFAULT_L_CAP)
    }

    pub fn with_cap(r: f64, theta0: f64, l_cap: usize) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid(format!(
                "squeezing amplitude must be >= 0, got {r}"
            )));
        }
        Ok(Self { r, theta0, l_cap })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Initial relative phase; it only rotates coherences.
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn l_cap(&self) -> usize {
        self.l_cap
    }
}

/// Boltzmann weight of all input pairs with `l_x + l_y > cap`.
fn neglected_weight(q: f64, cap: usize) -> f64 {
    // P(l_x + l_y = s) = (1−q)² (s+1) qˢ; tail sum in closed form
    let s = (cap + 1) as f64;
    q.powf(s) * (1.0 + s * (1.0 - q))
}

/// `P(n_x′, n_y′) = Σ_{l_x+l_y ≤ cap} w(l_x, l_y) |⟨n_x′, n_y′|Ŝ₂|l_x, l_y⟩|²`.
pub fn thermal_weighted_distribution(
    op: &TwoModeSqueezeOp,
    nbar0: f64,
    n_max: usize,
) -> Result<FockDistribution> {
    if !(nbar0.is_finite() && nbar0 >= 0.0) {
        return Err(invalid(format!(
            "mean occupation must be >= 0, got {nbar0}"
        )));
    }
    if op.l_cap < n_max {
        return Err(invalid(format!(
            "Boltzmann cap {} is below the phonon cap {n_max}",
            op.l_cap
        )));
    }
    let q = nbar0 / (1.0 + nbar0);
    let norm = 1.0 / (1.0 + nbar0).powi(2);
    let side = n_max + 1;
    let mut probs = vec![0.0; side * side];
    for n_x in 0..side {
        for n_y in 0..side {
            let mut acc = 0.0;
            // l_y − n_y = l_x − n_x
            let l_x_min = n_x.saturating_sub(n_y);
            for l_x in l_x_min..=op.l_cap {
                let l_y = l_x + n_y - n_x;
                if l_x + l_y > op.l_cap {
                    break;
                }
                let w = norm * q.powi((l_x + l_y) as i32);
                if w == 0.0 {
                    break;
                }
                acc += w * s2_matrix_element_sq(n_x, n_y, l_x, l_y, op.r);
            }
            probs[n_x * side + n_y] = acc;
        }
    }
    let mut dist = FockDistribution::from_table(n_max, probs)?;
    let neglected = if q == 0.0 {
        0.0
    } else {
        neglected_weight(q, op.l_cap)
    };
    if neglected > CAP_WARNING {
        dist.warning = Some(format!(
            "Boltzmann sum capped at l_x + l_y <= {} neglects weight {neglected:.3e}",
            op.l_cap
        ));
    }
    Ok(dist)
}
