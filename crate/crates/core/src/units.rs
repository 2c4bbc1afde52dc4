//! Physical constants and the oscillator unit system.
//!
//! Dimensionless quadratures are `x̄ = x / (2 Δx₀)` and `p̄ = p / (2 Δp₀)`, so
//! the ground state has variance 1/4 in each quadrature.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ⁸⁵Rb, kg.
pub const RB85_MASS: f64 = 84.911_789_738 * ATOMIC_MASS_UNIT;

/// Isotropic lattice trap frequency used throughout the experiment, rad/s.
pub const DEFAULT_OMEGA: f64 = 2.0 * PI * 125e3;

/// Trap parameters and the derived ground-state scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    mass: f64,
    omega: f64,
    omega_prime: f64,
}

impl OscillatorConfig {
    pub fn new(mass: f64, omega: f64, omega_prime: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid(format!("mass must be positive, got {mass}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid(format!("omega must be positive, got {omega}")));
        }
        if !(omega_prime.is_finite() && omega_prime > 0.0) {
            return Err(invalid(format!(
                "omega_prime must be positive, got {omega_prime}"
            )));
        }
        Ok(Self {
            mass,
            omega,
            omega_prime,
        })
    }

    /// ⁸⁵Rb at ω = 2π×125 kHz, jumping to ω′ = ω·e^{-r}.
    pub fn rb85_with_jump(r_jump: f64) -> Result<Self> {
        Self::new(RB85_MASS, DEFAULT_OMEGA, DEFAULT_OMEGA * (-r_jump).exp())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega_prime(&self) -> f64 {
        self.omega_prime
    }

    /// Ground-state position uncertainty Δx₀ = √(ħ / 2mω), m.
    pub fn dx0(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega)).sqrt()
    }

    /// Ground-state momentum uncertainty Δp₀ = √(ħmω / 2), kg·m/s.
    pub fn dp0(&self) -> f64 {
        (HBAR * self.mass * self.omega / 2.0).sqrt()
    }

    /// Ground-state velocity uncertainty Δv₀ = Δp₀ / m, m/s.
    pub fn dv0(&self) -> f64 {
        self.dp0() / self.mass
    }

    /// Oscillation period 2π/ω, s.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Converts a dimensionless momentum quadrature to velocity (m/s).
    pub fn velocity_from_quadrature(&self, p_bar: f64) -> f64 {
        2.0 * self.dv0() * p_bar
    }
}
