//! Experimental sequences built from the Gaussian engine: frequency-jump
//! squeezing, the delayed two-mode protocol with its virtual beam splitter,
//! and the squeeze/evolve/unsqueeze echo under inhomogeneous dephasing.
//!
//! Timing conventions. A jump sequence starts with the switch `ω → ω′` at
//! its own time zero and ends with the switch back after `π/(2ω′)`. Its
//! output is squeezed in p̄. In the two-mode protocol the y sequence starts
//! `relative_phase / ω` after the x sequence; evolution time `t` is counted
//! from the end of the y sequence.
//!
//! Echo dephasing. A static Gaussian spread `σ_ω` of site frequencies turns
//! the `2ω` beat of the echo into `exp(−2σ_ω²τ²) cos 2ωτ`, so the envelope
//! reaches `1/e` at `τ_e = 1/(√2 σ_ω)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{gaussian_phonon_probs, PhononDistribution};
use crate::gaussian::{GaussianState, SqueezeParams};
use crate::quadrature::GaussHermite;
use crate::spectroscopy::{populations_from_probs, SidebandModel};
use crate::units::OscillatorConfig;

/// Default Gauss–Hermite order for ensemble averages.
pub const DEFAULT_QUADRATURE_ORDER: usize = 21;

/// Phonon probability mass allowed beyond the cutoff in the echo.
pub const ECHO_MASS_TOLERANCE: f64 = 1e-10;

/// `ln(ω/ω′)`; negative for a jump up in frequency.
pub fn squeeze_amplitude_from_jump(omega: f64, omega_prime: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0 && omega_prime.is_finite() && omega_prime > 0.0) {
        return Err(invalid(format!(
            "frequencies must be positive, got {omega} and {omega_prime}"
        )));
    }
    Ok((omega / omega_prime).ln())
}

/// One frequency switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    /// Seconds from the start of the schedule.
    pub time: f64,
    /// Trap frequency after the switch, rad/s.
    pub frequency: f64,
}

/// Frequency switches of one or more jump sequences on a common clock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpSchedule {
    pub config: OscillatorConfig,
    pub events: Vec<JumpEvent>,
    pub total_duration: f64,
}

impl JumpSchedule {
    /// The jump-rotate-jump sequence starting at `start`.
    pub fn jump_rotate_jump(config: OscillatorConfig, start: f64) -> Self {
        let hold = FRAC_PI_2 / config.omega_prime();
        Self {
            config,
            events: vec![
                JumpEvent {
                    time: start,
                    frequency: config.omega_prime(),
                },
                JumpEvent {
                    time: start + hold,
                    frequency: config.omega(),
                },
            ],
            total_duration: start + hold,
        }
    }

    /// `(time_us, frequency_hz)` rows.
    pub fn rows(&self) -> Vec<[f64; 2]> {
        self.events
            .iter()
            .map(|e| [e.time * 1e6, e.frequency / (2.0 * PI)])
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.events.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(invalid("schedule times must increase strictly"));
        }
        let allowed = [self.config.omega(), self.config.omega_prime()];
        if self.events.iter().any(|e| !allowed.contains(&e.frequency)) {
            return Err(invalid("schedule frequencies must be ω or ω′"));
        }
        Ok(())
    }
}

/// Applies jump, quarter-turn hold and jump back to mode `mode` of `state`.
fn jump_rotate_jump(
    state: &GaussianState,
    mode: usize,
    config: &OscillatorConfig,
) -> Result<GaussianState> {
    let half = 0.5 * squeeze_amplitude_from_jump(config.omega(), config.omega_prime())?;
    state
        .apply_squeeze(mode, SqueezeParams::signed(half, 0.0)?)?
        .apply_rotation(mode, FRAC_PI_2)?
        .apply_squeeze(mode, SqueezeParams::signed(half, FRAC_PI_2)?)
}

/// Runs the jump sequence on the ground state of one mode.
pub fn single_mode_jump_protocol(
    config: &OscillatorConfig,
) -> Result<(GaussianState, JumpSchedule)> {
    single_mode_jump_protocol_from(config, &GaussianState::vacuum(1)?)
}

/// Runs the jump sequence on an arbitrary single-mode input.
pub fn single_mode_jump_protocol_from(
    config: &OscillatorConfig,
    input: &GaussianState,
) -> Result<(GaussianState, JumpSchedule)> {
    if input.mode_count() != 1 {
        return Err(invalid("the jump sequence acts on a single-mode state"));
    }
    let state = jump_rotate_jump(input, 0, config)?;
    Ok((state, JumpSchedule::jump_rotate_jump(*config, 0.0)))
}

/// Two independently squeezed modes, evaluated at any evolution time.
#[derive(Debug, Clone)]
pub struct TwoModeEvolution {
    config: OscillatorConfig,
    relative_phase: f64,
    /// Both modes at the end of the y sequence, before the beam splitter.
    initial: GaussianState,
    x_schedule: JumpSchedule,
    y_schedule: JumpSchedule,
}

impl TwoModeEvolution {
    pub fn config(&self) -> &OscillatorConfig {
        &self.config
    }

    pub fn relative_phase(&self) -> f64 {
        self.relative_phase
    }

    /// Start of the y sequence relative to the x sequence.
    pub fn delay(&self) -> f64 {
        self.relative_phase / self.config.omega()
    }

    pub fn x_schedule(&self) -> &JumpSchedule {
        &self.x_schedule
    }

    pub fn y_schedule(&self) -> &JumpSchedule {
        &self.y_schedule
    }

    /// Both sequences merged on the x clock.
    pub fn merged_schedule(&self) -> JumpSchedule {
        let mut events: Vec<JumpEvent> = self
            .x_schedule
            .events
            .iter()
            .chain(&self.y_schedule.events)
            .copied()
            .collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        events.dedup_by(|b, a| a.time == b.time && a.frequency == b.frequency);
        JumpSchedule {
            config: self.config,
            events,
            total_duration: self
                .x_schedule
                .total_duration
                .max(self.y_schedule.total_duration),
        }
    }

    /// Modes x and y after free evolution for `t`, without the beam splitter.
    pub fn lab_state_at(&self, t: f64) -> Result<GaussianState> {
        let phi = self.config.omega() * t;
        self.initial.apply_rotation(0, phi)?.apply_rotation(1, phi)
    }

    /// Output modes x′ and y′ of the 45° beam splitter at evolution time `t`.
    pub fn state_at(&self, t: f64) -> Result<GaussianState> {
        self.lab_state_at(t)?.apply_beam_splitter_50_50(0, 1)
    }

    /// Squeeze phases `(θx, θy)` with `Ŝ(r, θ)|0⟩` equal to each mode at `t`.
    pub fn phases_at(&self, t: f64) -> (f64, f64) {
        let w = self.config.omega();
        let theta_x = FRAC_PI_2 - w * (t + self.delay());
        let theta_y = FRAC_PI_2 - w * t;
        (theta_x, theta_y)
    }
}

/// Two-mode protocol on ground-state inputs.
pub fn two_mode_protocol(
    config: &OscillatorConfig,
    relative_phase: f64,
) -> Result<TwoModeEvolution> {
    two_mode_protocol_thermal(config, relative_phase, 0.0)
}

/// Two-mode protocol with both modes starting in a thermal state of mean
/// occupation `nbar0`.
pub fn two_mode_protocol_thermal(
    config: &OscillatorConfig,
    relative_phase: f64,
    nbar0: f64,
) -> Result<TwoModeEvolution> {
    if !relative_phase.is_finite() || relative_phase < 0.0 {
        return Err(invalid(format!(
            "relative phase must be finite and >= 0, got {relative_phase}"
        )));
    }
    let input = GaussianState::thermal(2, nbar0)?;
    let squeezed = jump_rotate_jump(&jump_rotate_jump(&input, 0, config)?, 1, config)?;
    let delay = relative_phase / config.omega();
    // x has already evolved freely for the delay when y finishes.
    let initial = squeezed.apply_rotation(0, config.omega() * delay)?;
    Ok(TwoModeEvolution {
        config: *config,
        relative_phase,
        initial,
        x_schedule: JumpSchedule::jump_rotate_jump(*config, 0.0),
        y_schedule: JumpSchedule::jump_rotate_jump(*config, delay),
    })
}

/// How the site-frequency distribution is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    GaussHermite { order: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

/// Static Gaussian spread of trap frequencies across lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InhomogeneityModel {
    sigma_omega: f64,
    averaging: Averaging,
}

impl InhomogeneityModel {
    pub fn new(sigma_omega: f64, averaging: Averaging) -> Result<Self> {
        if !(sigma_omega.is_finite() && sigma_omega >= 0.0) {
            return Err(invalid(format!(
                "sigma_omega must be >= 0, got {sigma_omega}"
            )));
        }
        match averaging {
            Averaging::GaussHermite { order: 0 } | Averaging::MonteCarlo { samples: 0, .. } => {
                return Err(invalid("ensemble size must be positive"));
            }
            _ => {}
        }
        Ok(Self {
            sigma_omega,
            averaging,
        })
    }

    /// Gauss–Hermite averaging of the default order.
    pub fn gaussian(sigma_omega: f64) -> Result<Self> {
        Self::new(
            sigma_omega,
            Averaging::GaussHermite {
                order: DEFAULT_QUADRATURE_ORDER,
            },
        )
    }

    /// Spread whose echo envelope falls to `1/e` after `decay_time`.
    pub fn from_decay_time(decay_time: f64) -> Result<Self> {
        if !(decay_time.is_finite() && decay_time > 0.0) {
            return Err(invalid(format!(
                "decay time must be positive, got {decay_time}"
            )));
        }
        Self::gaussian(sigma_omega_for_decay(decay_time))
    }

    pub fn none() -> Self {
        Self {
            sigma_omega: 0.0,
            averaging: Averaging::GaussHermite { order: 1 },
        }
    }

    pub fn sigma_omega(&self) -> f64 {
        self.sigma_omega
    }

    pub fn averaging(&self) -> Averaging {
        self.averaging
    }

    /// 1/e time of the echo envelope, infinite without dephasing.
    pub fn decay_time(&self) -> f64 {
        1.0 / (std::f64::consts::SQRT_2 * self.sigma_omega)
    }

    /// Site frequencies and weights around `omega`.
    pub fn ensemble(&self, omega: f64) -> Result<Vec<(f64, f64)>> {
        if self.sigma_omega == 0.0 {
            return Ok(vec![(omega, 1.0)]);
        }
        match self.averaging {
            Averaging::GaussHermite { order } => {
                let rule = GaussHermite::new(order)?;
                Ok(rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| (omega + self.sigma_omega * x, *w))
                    .collect())
            }
            Averaging::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(omega, self.sigma_omega)
                    .map_err(|e| invalid(format!("frequency distribution: {e}")))?;
                let w = 1.0 / samples as f64;
                Ok((0..samples).map(|_| (normal.sample(&mut rng), w)).collect())
            }
        }
    }
}

/// `σ_ω = 1/(√2 τ_e)`.
pub fn sigma_omega_for_decay(decay_time: f64) -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * decay_time)
}

/// Single-mode state after `Ŝ†(r) Û(φ) Ŝ(r)` on a thermal input.
pub fn echo_state(r: f64, nbar0: f64, phi: f64) -> Result<GaussianState> {
    GaussianState::thermal(1, nbar0)?
        .apply_squeeze(0, SqueezeParams::new(r, 0.0)?)?
        .apply_rotation(0, phi)?
        .apply_squeeze(0, SqueezeParams::new(r, FRAC_PI_2)?)
}

/// Largest phonon number the echo distribution may need.
pub const ECHO_PHONON_LIMIT: usize = 1 << 20;

/// Red/blue sideband ratio of the echo sequence for each delay, averaged over
/// the site-frequency ensemble (populations are averaged, then divided).
pub fn echo_ratio_vs_delay(
    r: f64,
    nbar0: f64,
    tau_grid: &[f64],
    config: &OscillatorConfig,
    inhom: &InhomogeneityModel,
    sideband: &SidebandModel,
) -> Result<Vec<(f64, f64)>> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(format!(
            "squeezing amplitude must be >= 0, got {r}"
        )));
    }
    if let Some(tau) = tau_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(invalid(format!("delays must be >= 0, got {tau}")));
    }
    let ensemble = inhom.ensemble(config.omega())?;
    tau_grid
        .par_iter()
        .map(|&tau| {
            let (mut plus, mut minus) = (0.0, 0.0);
            for &(omega, weight) in &ensemble {
                let state = echo_state(r, nbar0, omega * tau)?;
                let probs = gaussian_phonon_probs(&state, ECHO_MASS_TOLERANCE, ECHO_PHONON_LIMIT)?;
                let (p, m) = populations_from_probs(&probs, sideband);
                plus += weight * p;
                minus += weight * m;
            }
            if plus == 0.0 {
                return Err(Error::UndefinedRatio(format!(
                    "blue sideband vanishes at τ = {tau}"
                )));
            }
            Ok((tau, minus / plus))
        })
        .collect()
}

/// Mean phonon number of the echo output at one delay, without averaging.
pub fn echo_mean_phonons(r: f64, nbar0: f64, phi: f64) -> Result<f64> {
    let probs = gaussian_phonon_probs(
        &echo_state(r, nbar0, phi)?,
        ECHO_MASS_TOLERANCE,
        ECHO_PHONON_LIMIT,
    )?;
    Ok(PhononDistribution::from_probs(probs)?.stats().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::VACUUM_VARIANCE;

    fn config(r: f64) -> OscillatorConfig {
        OscillatorConfig::rb85_with_jump(r).unwrap()
    }

    #[test]
    fn jump_amplitudes() {
        assert!(
            (squeeze_amplitude_from_jump(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-15
        );
        assert_eq!(squeeze_amplitude_from_jump(3.0, 3.0).unwrap(), 0.0);
        assert!(squeeze_amplitude_from_jump(-1.0, 1.0).is_err());
        assert!(squeeze_amplitude_from_jump(1.0, 0.0).is_err());
        assert!(squeeze_amplitude_from_jump(1.0, 2.0).unwrap() < 0.0);
    }

    #[test]
    fn jump_protocol_reaches_full_squeezing() {
        let (state, schedule) = single_mode_jump_protocol(&config(1.21)).unwrap();
        let b = state.mode_block(0);
        let eig = nalgebra::SymmetricEigen::new(b);
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        assert!((lo - (-2.42f64).exp() / 4.0).abs() < 1e-12);
        assert!((hi - 2.42f64.exp() / 4.0).abs() < 1e-10);
        assert!((b.determinant() - 1.0 / 16.0).abs() < 1e-12);
        assert!((schedule.total_duration - FRAC_PI_2 / config(1.21).omega_prime()).abs() < 1e-18);
        schedule.validate().unwrap();
    }

    #[test]
    fn no_jump_leaves_vacuum() {
        let (state, _) = single_mode_jump_protocol(&config(0.0)).unwrap();
        assert!((state.x_variance(0) - VACUUM_VARIANCE).abs() < 1e-15);
        assert!((state.p_variance(0) - VACUUM_VARIANCE).abs() < 1e-15);
    }

    #[test]
    fn phases_describe_the_modes() {
        let evo = two_mode_protocol(&config(0.7), 1.1).unwrap();
        for k in 0..7 {
            let t = k as f64 * 0.9e-6;
            let (tx, ty) = evo.phases_at(t);
            let lab = evo.lab_state_at(t).unwrap();
            for (mode, theta) in [(0, tx), (1, ty)] {
                let expected = GaussianState::vacuum(1)
                    .unwrap()
                    .apply_squeeze(0, SqueezeParams::new(0.7, theta).unwrap())
                    .unwrap();
                assert!((lab.mode_block(mode) - expected.mode_block(0)).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn merged_schedule_is_ordered() {
        let evo = two_mode_protocol(&config(0.89), FRAC_PI_2).unwrap();
        let merged = evo.merged_schedule();
        assert_eq!(merged.events.len(), 4);
        merged.validate().unwrap();
        assert!((evo.y_schedule().events[0].time - 2e-6).abs() < 1e-15);
    }

    #[test]
    fn decay_conversion() {
        let m = InhomogeneityModel::from_decay_time(80e-6).unwrap();
        assert!((m.decay_time() - 80e-6).abs() < 1e-18);
        assert!(InhomogeneityModel::new(-1.0, Averaging::GaussHermite { order: 3 }).is_err());
        assert!(InhomogeneityModel::new(
            1.0,
            Averaging::MonteCarlo {
                samples: 0,
                seed: 1
            }
        )
        .is_err());
    }

    #[test]
    fn echo_at_zero_delay_is_ground_state() {
        let model = SidebandModel::new(2.0 * PI * 1.5e3, 0.13, 0.0, 0.17e-3).unwrap();
        let inhom = InhomogeneityModel::from_decay_time(80e-6).unwrap();
        let out = echo_ratio_vs_delay(1.2, 0.0, &[0.0], &config(1.2), &inhom, &model).unwrap();
        assert!(out[0].1.abs() < 1e-12, "{}", out[0].1);
    }

    #[test]
    fn echo_breathes_at_twice_the_trap_frequency() {
        let c = config(1.2);
        let period = PI / c.omega();
        for k in 0..5 {
            let phi = c.omega() * k as f64 * 0.37e-6;
            let a = echo_mean_phonons(1.2, 0.06, phi).unwrap();
            let b = echo_mean_phonons(1.2, 0.06, phi + c.omega() * period).unwrap();
            assert!((a - b).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn monte_carlo_matches_quadrature() {
        let model = SidebandModel::experiment_defaults();
        let c = config(0.5);
        let gh = InhomogeneityModel::from_decay_time(80e-6).unwrap();
        let mc = InhomogeneityModel::new(
            gh.sigma_omega(),
            Averaging::MonteCarlo {
                samples: 4000,
                seed: 3,
            },
        )
        .unwrap();
        let taus = [10e-6, 41e-6, 77e-6];
        let a = echo_ratio_vs_delay(0.5, 0.06, &taus, &c, &gh, &model).unwrap();
        let b = echo_ratio_vs_delay(0.5, 0.06, &taus, &c, &mc, &model).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.1 - y.1).abs() < 0.01, "{x:?} {y:?}");
        }
    }
}
