//! Measurement models: Lamb–Dicke sideband populations and the red/blue
//! ratio, synthetic sideband spectra, and Raman velocimetry scans with their
//! Gaussian fits.
//!
//! Sideband populations share one arbitrary normalization, so only ratios
//! are meaningful. They are computed from the x-mode phonon marginal.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_gaussian_with_response, GaussianFit};
use crate::fock::{
    squeezed_thermal_distribution, thermal_weighted_distribution, FockAxis, FockDistribution,
    PhononDistribution, TwoModeSqueezeOp,
};
use crate::gaussian::GaussianState;
use crate::protocol::InhomogeneityModel;
use crate::units::OscillatorConfig;

/// Counter-propagating Raman beams near 795 nm, rad/m.
pub const DEFAULT_K_EFF: f64 = 2.0 * TAU / 795e-9;

/// Duration of the velocity-selective square pulse, s.
pub const DEFAULT_RAMAN_PULSE: f64 = 0.1e-3;

/// Rabi flopping on the first sidebands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandModel {
    rabi_01: f64,
    lamb_dicke: f64,
    gamma: f64,
    pulse_duration: f64,
}

impl SidebandModel {
    /// `rabi_01 = ηΩ` in rad/s, `gamma` in 1/s, `pulse_duration` in s. The
    /// model assumes the Lamb–Dicke regime `η ≪ 1`. A zero `gamma` switches
    /// off the flopping decay.
    pub fn new(rabi_01: f64, lamb_dicke: f64, gamma: f64, pulse_duration: f64) -> Result<Self> {
        if !(rabi_01.is_finite() && rabi_01 > 0.0) {
            return Err(invalid(format!("rabi_01 must be positive, got {rabi_01}")));
        }
        if !(lamb_dicke.is_finite() && lamb_dicke > 0.0 && lamb_dicke < 1.0) {
            return Err(invalid(format!(
                "lamb_dicke must lie in (0, 1), got {lamb_dicke}"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(invalid(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(pulse_duration.is_finite() && pulse_duration > 0.0) {
            return Err(invalid(format!(
                "pulse duration must be positive, got {pulse_duration}"
            )));
        }
        Ok(Self {
            rabi_01,
            lamb_dicke,
            gamma,
            pulse_duration,
        })
    }

    /// `Ω₀₁ = 2π×1.5 kHz`, `η = 0.13`, `γ = 10.36×10³ s⁻¹`, `t = 0.17 ms`.
    pub fn experiment_defaults() -> Self {
        Self {
            rabi_01: TAU * 1.5e3,
            lamb_dicke: 0.13,
            gamma: 10.36e3,
            pulse_duration: 0.17e-3,
        }
    }

    pub fn rabi_01(&self) -> f64 {
        self.rabi_01
    }

    pub fn lamb_dicke(&self) -> f64 {
        self.lamb_dicke
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pulse_duration(&self) -> f64 {
        self.pulse_duration
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.rabi_01, self.lamb_dicke, gamma, self.pulse_duration)
    }

    pub fn with_pulse_duration(self, pulse_duration: f64) -> Result<Self> {
        Self::new(self.rabi_01, self.lamb_dicke, self.gamma, pulse_duration)
    }

    fn flop(&self, rabi: f64) -> f64 {
        let t = self.pulse_duration;
        0.5 * (1.0 - (-self.gamma * t).exp() * (rabi * t).cos())
    }
}

/// `(P₊, P₋)` for `probs[n] = P(n)`.
pub fn populations_from_probs(probs: &[f64], model: &SidebandModel) -> (f64, f64) {
    let (mut plus, mut minus) = (0.0, 0.0);
    for (n, p) in probs.iter().enumerate() {
        let n = n as f64;
        plus += p * model.flop((n + 1.0).sqrt() * model.rabi_01);
        minus += p * model.flop(n.sqrt() * model.rabi_01);
    }
    (plus, minus)
}

/// Carrier population on the same scale, with Rabi frequency `Ω₀₁/η`.
pub fn carrier_population(probs: &[f64], model: &SidebandModel) -> f64 {
    let total: f64 = probs.iter().sum();
    total * model.flop(model.rabi_01 / model.lamb_dicke)
}

/// `(P₊, P₋)` of a two-mode table, probed on the x mode.
pub fn sideband_populations(dist: &FockDistribution, model: &SidebandModel) -> (f64, f64) {
    populations_from_probs(dist.marginal(FockAxis::X).probs(), model)
}

pub fn sideband_populations_1d(dist: &PhononDistribution, model: &SidebandModel) -> (f64, f64) {
    populations_from_probs(dist.probs(), model)
}

fn ratio_of(plus: f64, minus: f64) -> Result<f64> {
    if plus == 0.0 {
        return Err(Error::UndefinedRatio(
            "blue sideband population is zero".into(),
        ));
    }
    Ok(minus / plus)
}

/// Red over blue sideband population, `R = P₋/P₊`.
pub fn ratio_r(dist: &FockDistribution, model: &SidebandModel) -> Result<f64> {
    let (p, m) = sideband_populations(dist, model);
    ratio_of(p, m)
}

pub fn ratio_r_1d(dist: &PhononDistribution, model: &SidebandModel) -> Result<f64> {
    let (p, m) = sideband_populations_1d(dist, model);
    ratio_of(p, m)
}

/// `R` for a two-mode squeezed thermal input with phonon cap `n_max` and
/// the default Boltzmann cap.
pub fn tmsv_ratio(r: f64, nbar0: f64, model: &SidebandModel, n_max: usize) -> Result<f64> {
    let dist = thermal_weighted_distribution(&TwoModeSqueezeOp::new(r, 0.0)?, nbar0, n_max)?;
    ratio_r(&dist, model)
}

/// `R` for a single-mode squeezed thermal input with phonon cap `n_max`.
pub fn smsv_ratio(r: f64, nbar0: f64, model: &SidebandModel, n_max: usize) -> Result<f64> {
    ratio_r_1d(&squeezed_thermal_distribution(r, nbar0, n_max)?, model)
}

/// Uniform grid of detunings, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetuningGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl DetuningGrid {
    pub fn symmetric(half_width: f64, steps: usize) -> Self {
        Self {
            min: -half_width,
            max: half_width,
            steps,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.steps < 2 || !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min
        {
            return Err(invalid(format!(
                "detuning grid needs max > min and at least two steps, got {self:?}"
            )));
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|k| self.min + h * k as f64).collect())
    }
}

/// Three-peak sideband spectrum versus Raman detuning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandSpectrum {
    /// rad/s, relative to the carrier.
    pub detunings: Vec<f64>,
    pub signal: Vec<f64>,
    pub red_area: f64,
    pub carrier_area: f64,
    pub blue_area: f64,
}

impl SidebandSpectrum {
    /// Trapezoidal area of the trace within `half_window` of `center`.
    pub fn area_near(&self, center: f64, half_window: f64) -> f64 {
        let mut area = 0.0;
        for k in 1..self.detunings.len() {
            let (a, b) = (self.detunings[k - 1], self.detunings[k]);
            if (a - center).abs() <= half_window && (b - center).abs() <= half_window {
                area += 0.5 * (b - a) * (self.signal[k - 1] + self.signal[k]);
            }
        }
        area
    }
}

/// Red sideband at `−ω`, carrier at 0, blue sideband at `+ω`, each a Gaussian
/// of standard deviation `σ_ω` whose area is the corresponding population.
/// The carrier scale is for display only. Without broadening each peak
/// occupies the nearest grid cell.
pub fn synthesize_sideband_spectrum(
    dist: &PhononDistribution,
    model: &SidebandModel,
    inhom: &InhomogeneityModel,
    trap_omega: f64,
    grid: &DetuningGrid,
) -> Result<SidebandSpectrum> {
    let detunings = grid.points()?;
    let (blue, red) = sideband_populations_1d(dist, model);
    let carrier = carrier_population(dist.probs(), model);
    let sigma = inhom.sigma_omega();
    let h = detunings[1] - detunings[0];
    let mut signal = vec![0.0; detunings.len()];
    for (center, area) in [(-trap_omega, red), (0.0, carrier), (trap_omega, blue)] {
        if sigma > 0.0 {
            let norm = area / (sigma * (2.0 * PI).sqrt());
            for (s, d) in signal.iter_mut().zip(&detunings) {
                *s += norm * (-0.5 * ((d - center) / sigma).powi(2)).exp();
            }
        } else {
            let k = ((center - grid.min) / h).round();
            if k >= 0.0 && (k as usize) < detunings.len() {
                signal[k as usize] += area / h;
            }
        }
    }
    Ok(SidebandSpectrum {
        detunings,
        signal,
        red_area: red,
        carrier_area: carrier,
        blue_area: blue,
    })
}

/// Direction along which the velocity distribution is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanAxis {
    X,
    Y,
    /// `(p̄x + p̄y)/√2`, the first beam-splitter output.
    XPrime,
    /// `(−p̄x + p̄y)/√2`, the second beam-splitter output.
    YPrime,
}

impl FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "x'" | "x_prime" => Ok(Self::XPrime),
            "y'" | "y_prime" => Ok(Self::YPrime),
            other => Err(invalid(format!(
                "unknown scan axis {other:?}; expected x, y, x_prime or y_prime"
            ))),
        }
    }
}

impl ScanAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::X => "x",
            Self::Y => "y",
            Self::XPrime => "x_prime",
            Self::YPrime => "y_prime",
        }
    }

    /// Coefficients on `(x̄₀, p̄₀, x̄₁, p̄₁, …)`.
    fn coefficients(&self, n_modes: usize) -> Result<Vec<f64>> {
        let needed = match self {
            Self::X => 1,
            _ => 2,
        };
        if n_modes < needed {
            return Err(invalid(format!(
                "axis {} needs {needed} modes, state has {n_modes}",
                self.name()
            )));
        }
        let mut c = vec![0.0; 2 * n_modes];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Self::X => c[1] = 1.0,
            Self::Y => c[3] = 1.0,
            Self::XPrime => {
                c[1] = h;
                c[3] = h;
            }
            Self::YPrime => {
                c[1] = -h;
                c[3] = h;
            }
        }
        Ok(c)
    }
}

/// Standard deviation of p̄ along `axis`.
pub fn momentum_width(state: &GaussianState, axis: ScanAxis) -> Result<f64> {
    let c = axis.coefficients(state.mode_count())?;
    Ok(state.combination_variance(&c).sqrt())
}

/// Additive Gaussian noise on the excited fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanNoise {
    /// Standard deviation as a fraction of the peak height.
    pub relative_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityScanOptions {
    pub k_eff: f64,
    /// Square-pulse length whose line shape is convolved in; `None` skips it.
    pub pulse_duration: Option<f64>,
    pub peak_fraction: f64,
    pub baseline: f64,
    pub noise: Option<ScanNoise>,
}

impl Default for VelocityScanOptions {
    fn default() -> Self {
        Self {
            k_eff: DEFAULT_K_EFF,
            pulse_duration: Some(DEFAULT_RAMAN_PULSE),
            peak_fraction: 0.5,
            baseline: 0.05,
            noise: None,
        }
    }
}

/// Excited fraction versus two-photon detuning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityScan {
    /// rad/s.
    pub detunings: Vec<f64>,
    pub excited_fraction: Vec<f64>,
    /// rad/m.
    pub k_eff: f64,
    pub noise_seed: Option<u64>,
    /// Absolute noise standard deviation, when noise was added.
    pub noise_sd: Option<f64>,
    pub pulse_duration: Option<f64>,
}

impl VelocityScan {
    pub fn new(detunings: Vec<f64>, excited_fraction: Vec<f64>, k_eff: f64) -> Result<Self> {
        if detunings.len() != excited_fraction.len() {
            return Err(invalid("detunings and fractions differ in length"));
        }
        if excited_fraction.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(invalid("excited fractions must lie in [0, 1]"));
        }
        if !(k_eff.is_finite() && k_eff > 0.0) {
            return Err(invalid(format!("k_eff must be positive, got {k_eff}")));
        }
        Ok(Self {
            detunings,
            excited_fraction,
            k_eff,
            noise_seed: None,
            noise_sd: None,
            pulse_duration: None,
        })
    }
}

/// Discretized line shape of a weak square pulse of length `duration`:
/// nodes `(δ, w)` with `w ∝ sinc²(δT/2)` normalized to unit sum.
pub fn pulse_response(duration: f64) -> Result<Vec<(f64, f64)>> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(invalid(format!(
            "pulse duration must be positive, got {duration}"
        )));
    }
    let zero = TAU / duration;
    let step = zero / 8.0;
    let half = 40 * 8;
    let mut nodes: Vec<(f64, f64)> = (-half..=half)
        .map(|k| {
            let d = k as f64 * step;
            let x = 0.5 * d * duration;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            (d, sinc * sinc)
        })
        .collect();
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    for n in &mut nodes {
        n.1 /= total;
    }
    Ok(nodes)
}

/// Velocity standard deviation along `axis`, m/s.
pub fn velocity_width(
    state: &GaussianState,
    axis: ScanAxis,
    config: &OscillatorConfig,
) -> Result<f64> {
    Ok(config.velocity_from_quadrature(momentum_width(state, axis)?))
}

/// Synthesizes a Raman velocimetry scan of `state` along `axis`.
pub fn synthesize_velocity_scan(
    state: &GaussianState,
    axis: ScanAxis,
    config: &OscillatorConfig,
    grid: &DetuningGrid,
    opts: &VelocityScanOptions,
) -> Result<VelocityScan> {
    if !(opts.k_eff.is_finite() && opts.k_eff > 0.0) {
        return Err(invalid(format!(
            "k_eff must be positive, got {}",
            opts.k_eff
        )));
    }
    if !(opts.peak_fraction > 0.0
        && opts.baseline >= 0.0
        && opts.peak_fraction + opts.baseline <= 1.0)
    {
        return Err(invalid("peak fraction and baseline must fit in [0, 1]"));
    }
    let sigma = opts.k_eff * velocity_width(state, axis, config)?;
    let detunings = grid.points()?;
    let response = match opts.pulse_duration {
        Some(t) => pulse_response(t)?,
        None => vec![(0.0, 1.0)],
    };
    let mut fraction: Vec<f64> = detunings
        .iter()
        .map(|d| {
            let peak: f64 = response
                .iter()
                .map(|(u, w)| w * (-0.5 * ((d - u) / sigma).powi(2)).exp())
                .sum();
            opts.baseline + opts.peak_fraction * peak
        })
        .collect();
    let mut noise_sd = None;
    if let Some(noise) = opts.noise {
        let sd = noise.relative_sd * opts.peak_fraction;
        let normal = Normal::new(0.0, sd).map_err(|e| invalid(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for f in &mut fraction {
            *f = (*f + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
        noise_sd = Some(sd);
    }
    Ok(VelocityScan {
        detunings,
        excited_fraction: fraction,
        k_eff: opts.k_eff,
        noise_seed: opts.noise.map(|n| n.seed),
        noise_sd,
        pulse_duration: opts.pulse_duration,
    })
}

/// Gaussian fit of a scan, in detuning and in velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityFit {
    pub detuning: GaussianFit,
    /// m/s.
    pub center_velocity: f64,
    /// m/s.
    pub sigma_velocity: f64,
    /// m/s.
    pub sigma_velocity_err: f64,
}

/// Fits the scan, deconvolving the pulse line shape when the scan carries
/// one, and weighting by the known noise level when present.
pub fn gaussian_fit(scan: &VelocityScan) -> Result<VelocityFit> {
    let response = match scan.pulse_duration {
        Some(t) => pulse_response(t)?,
        None => vec![(0.0, 1.0)],
    };
    let fit = fit_gaussian_with_response(
        &scan.detunings,
        &scan.excited_fraction,
        scan.noise_sd,
        &response,
    )?;
    Ok(VelocityFit {
        center_velocity: fit.center / scan.k_eff,
        sigma_velocity: fit.sigma / scan.k_eff,
        sigma_velocity_err: fit.std_errors[1] / scan.k_eff,
        detuning: fit,
    })
}
