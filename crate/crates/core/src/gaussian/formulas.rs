//! Closed-form widths of the squeezed outputs, in dimensionless units
//! (vacuum standard deviation 1/2). Multiply by `2Δp₀` for physical momenta.

/// Standard deviation of p̄ on either beam-splitter output port, for two
/// vacuum inputs squeezed by `r` with phases `θx` and `θy`:
/// `[cosh 2r + sinh 2r · cos(θx+θy) · cos(θx−θy)]^{1/2} / 2`.
pub fn output_momentum_width(r: f64, theta_x: f64, theta_y: f64) -> f64 {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (c + s * (theta_x + theta_y).cos() * (theta_x - theta_y).cos()).sqrt() / 2.0
}

/// Momentum width of a single squeezed mode oscillating at `omega`; it
/// breathes at `2ω` with period `π/ω`.
pub fn single_mode_width_vs_time(r: f64, omega: f64, t: f64) -> f64 {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    (c + s * (2.0 * omega * t).cos()).sqrt() / 2.0
}

/// Standard deviations of the difference and sum of the output momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairUncertainties {
    /// Δ(p̄x′ − p̄y′)
    pub diff: f64,
    /// Δ(p̄x′ + p̄y′)
    pub sum: f64,
}

/// Difference/sum momentum uncertainties of the out-of-phase pair as a
/// function of the x-mode phase.
pub fn pair_momentum_uncertainties(r: f64, theta_x: f64) -> PairUncertainties {
    let (em, ep) = ((-2.0 * r).exp(), (2.0 * r).exp());
    let (s, c) = theta_x.sin_cos();
    let (s2, c2) = (s * s, c * c);
    PairUncertainties {
        diff: std::f64::consts::SQRT_2 * (em * s2 + ep * c2).sqrt() / 2.0,
        sum: std::f64::consts::SQRT_2 * (em * c2 + ep * s2).sqrt() / 2.0,
    }
}

/// Noise reduction, in dB, of a standard-deviation ratio below vacuum.
pub fn squeezing_db(width_ratio: f64) -> f64 {
    -20.0 * width_ratio.log10()
}
