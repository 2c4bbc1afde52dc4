//! Scenario configuration: a flat JSON object with unit-suffixed keys.
//!
//! Every key is optional except that exactly one of `r` and
//! `omega_prime_khz` must be given. Frequencies named `*_khz` are ordinary
//! frequencies (the angular value is 2π times larger); `gamma_khz` is the
//! decay rate γ of the Rabi flopping in 1/ms.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use tmsq_core::protocol::{sigma_omega_for_decay, Averaging, DEFAULT_QUADRATURE_ORDER};
use tmsq_core::units::ATOMIC_MASS_UNIT;
use tmsq_core::{InhomogeneityModel, OscillatorConfig, ScanAxis, SidebandModel};

use crate::CliError;

const RB85_MASS_AMU: f64 = 84.911_789_738;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mass_amu: Option<f64>,
    omega_khz: Option<f64>,
    omega_prime_khz: Option<f64>,
    r: Option<f64>,
    relative_phase_rad: Option<f64>,
    nbar0: Option<f64>,
    rabi_01_khz: Option<f64>,
    lamb_dicke: Option<f64>,
    gamma_khz: Option<f64>,
    pulse_ms: Option<f64>,
    sigma_omega_rad_s: Option<f64>,
    target_decay_us: Option<f64>,
    quadrature_order: Option<usize>,
    n_max: Option<usize>,
    l_cap: Option<usize>,
    criteria_time_us: Option<f64>,
    widths_periods: Option<f64>,
    widths_points: Option<usize>,
    ratio_r_max: Option<f64>,
    ratio_r_step: Option<f64>,
    echo_tau_max_us: Option<f64>,
    echo_tau_step_us: Option<f64>,
    wigner_points: Option<usize>,
    wigner_span_sd: Option<f64>,
    #[serde(default, deserialize_with = "present")]
    raman_pulse_ms: Option<Option<f64>>,
    raman_wavelength_nm: Option<f64>,
    velocimetry_axes: Option<Vec<String>>,
    velocimetry_points: Option<usize>,
    velocimetry_span_sd: Option<f64>,
    velocimetry_noise: Option<f64>,
    velocimetry_time_us: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

/// Distinguishes an explicit `null` from an absent key.
fn present<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Option<f64>>, D::Error> {
    Option::<f64>::deserialize(d).map(Some)
}

/// Where the squeezing amplitude came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeSource {
    Direct,
    FrequencyJump,
}

/// Fully resolved scenario. Everything except `output_dir` and `seed`
/// enters the config hash.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub mass_amu: f64,
    pub omega_khz: f64,
    pub omega_prime_khz: f64,
    pub r: f64,
    pub r_source: SqueezeSource,
    pub relative_phase_rad: f64,
    pub nbar0: f64,
    pub rabi_01_khz: f64,
    pub lamb_dicke: f64,
    pub gamma_khz: f64,
    pub pulse_ms: f64,
    pub sigma_omega_rad_s: f64,
    pub target_decay_us: Option<f64>,
    pub quadrature_order: usize,
    pub n_max: usize,
    pub l_cap: usize,
    pub criteria_time_us: f64,
    pub widths_periods: f64,
    pub widths_points: usize,
    pub ratio_r_max: f64,
    pub ratio_r_step: f64,
    pub echo_tau_max_us: f64,
    pub echo_tau_step_us: f64,
    pub wigner_points: usize,
    pub wigner_span_sd: f64,
    pub raman_pulse_ms: Option<f64>,
    pub raman_wavelength_nm: f64,
    pub velocimetry_axes: Vec<String>,
    pub velocimetry_points: usize,
    pub velocimetry_span_sd: f64,
    pub velocimetry_noise: f64,
    pub velocimetry_time_us: f64,
    #[serde(skip)]
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

/// Where a key's value was read from, for error messages.
struct Origin<'a> {
    path: Option<&'a Path>,
    text: &'a str,
    overrides: &'a [(String, String)],
}

impl Origin<'_> {
    fn locate(&self, key: &str) -> String {
        if let Some((k, v)) = self.overrides.iter().rev().find(|(k, _)| k == key) {
            return format!("--set {k}={v}");
        }
        let quoted = format!("\"{key}\"");
        let path = self
            .path
            .map_or("<config>".into(), |p| p.display().to_string());
        for (i, line) in self.text.lines().enumerate() {
            if let Some(pos) = line.find(&quoted) {
                if line[pos + quoted.len()..].trim_start().starts_with(':') {
                    return format!("{path}:{}", i + 1);
                }
            }
        }
        path
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        CliError::Config(format!("{}: {key}: {msg}", self.locate(key)))
    }
}

/// Parses `key=value`; the value is JSON when it parses as JSON, else a string.
pub fn parse_override(arg: &str) -> Result<(String, String), CliError> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(CliError::Config(format!("--set {arg}: expected key=value"))),
    }
}

fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

impl Scenario {
    /// Loads `path` (or an empty object when `None`) and applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("{}: cannot read config: {e}", p.display()))
            })?,
            None => "{}".to_string(),
        };
        Self::from_text(&text, path, overrides)
    }

    pub fn from_text(
        text: &str,
        path: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let name = path.map_or("<config>".into(), |p| p.display().to_string());
        let anchored = |e: serde_json::Error| {
            CliError::Config(format!("{name}:{}:{}: {e}", e.line(), e.column()))
        };
        // Parse the file alone first so any error in it carries its position.
        let _: RawConfig = serde_json::from_str(text).map_err(anchored)?;
        let mut map: Map<String, Value> = serde_json::from_str(text).map_err(anchored)?;
        for (k, v) in overrides {
            map.insert(k.clone(), override_value(v));
        }
        let raw: RawConfig = serde_json::from_value(Value::Object(map)).map_err(|e| {
            let keys: Vec<String> = overrides
                .iter()
                .map(|(k, v)| format!("--set {k}={v}"))
                .collect();
            CliError::Config(format!("{}: {e}", keys.join(" ")))
        })?;
        let origin = Origin {
            path,
            text,
            overrides,
        };
        Self::resolve(raw, &origin)
    }

    fn resolve(raw: RawConfig, o: &Origin) -> Result<Self, CliError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(o.err(key, format!("must be positive, got {v}")))
            }
        };
        let nonneg = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(o.err(key, format!("must be >= 0, got {v}")))
            }
        };
        let at_least = |key: &str, v: usize, min: usize| {
            if v >= min {
                Ok(v)
            } else {
                Err(o.err(key, format!("must be at least {min}, got {v}")))
            }
        };

        let mass_amu = positive("mass_amu", raw.mass_amu.unwrap_or(RB85_MASS_AMU))?;
        let omega_khz = positive("omega_khz", raw.omega_khz.unwrap_or(125.0))?;
        let (r, omega_prime_khz, r_source) = match (raw.r, raw.omega_prime_khz) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(format!(
                    "{} and {}: give either r or omega_prime_khz, not both",
                    o.locate("r"),
                    o.locate("omega_prime_khz")
                )))
            }
            (None, None) => {
                return Err(CliError::Config(format!(
                    "{}: one of r or omega_prime_khz is required",
                    o.path
                        .map_or("<config>".into(), |p| p.display().to_string())
                )))
            }
            (Some(r), None) => {
                let r = nonneg("r", r)?;
                (r, omega_khz * (-r).exp(), SqueezeSource::Direct)
            }
            (None, Some(wp)) => {
                let wp = positive("omega_prime_khz", wp)?;
                if wp > omega_khz {
                    return Err(o.err("omega_prime_khz", "must not exceed omega_khz"));
                }
                ((omega_khz / wp).ln(), wp, SqueezeSource::FrequencyJump)
            }
        };
        let relative_phase_rad = nonneg(
            "relative_phase_rad",
            raw.relative_phase_rad.unwrap_or(FRAC_PI_2),
        )?;
        let nbar0 = nonneg("nbar0", raw.nbar0.unwrap_or(0.06))?;
        let rabi_01_khz = positive("rabi_01_khz", raw.rabi_01_khz.unwrap_or(1.5))?;
        let lamb_dicke = positive("lamb_dicke", raw.lamb_dicke.unwrap_or(0.13))?;
        let gamma_khz = nonneg("gamma_khz", raw.gamma_khz.unwrap_or(10.36))?;
        let pulse_ms = positive("pulse_ms", raw.pulse_ms.unwrap_or(0.17))?;
        let (sigma_omega_rad_s, target_decay_us) =
            match (raw.sigma_omega_rad_s, raw.target_decay_us) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config(format!(
                        "{} and {}: sigma_omega_rad_s and target_decay_us are mutually exclusive",
                        o.locate("sigma_omega_rad_s"),
                        o.locate("target_decay_us")
                    )))
                }
                (Some(s), None) => (nonneg("sigma_omega_rad_s", s)?, None),
                (None, t) => {
                    let t = positive("target_decay_us", t.unwrap_or(80.0))?;
                    (sigma_omega_for_decay(t * 1e-6), Some(t))
                }
            };
        let quadrature_order = at_least(
            "quadrature_order",
            raw.quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
            1,
        )?;
        let n_max = at_least("n_max", raw.n_max.unwrap_or(25), 1)?;
        let l_cap = raw.l_cap.unwrap_or(50);
        if l_cap < n_max {
            return Err(o.err(
                "l_cap",
                format!("must be at least n_max = {n_max}, got {l_cap}"),
            ));
        }
        let criteria_time_us = nonneg("criteria_time_us", raw.criteria_time_us.unwrap_or(0.0))?;
        let widths_periods = positive("widths_periods", raw.widths_periods.unwrap_or(2.0))?;
        let widths_points = at_least("widths_points", raw.widths_points.unwrap_or(201), 2)?;
        let ratio_r_max = nonneg("ratio_r_max", raw.ratio_r_max.unwrap_or(1.5))?;
        let ratio_r_step = positive("ratio_r_step", raw.ratio_r_step.unwrap_or(0.05))?;
        let echo_tau_max_us = positive("echo_tau_max_us", raw.echo_tau_max_us.unwrap_or(240.0))?;
        let echo_tau_step_us = positive("echo_tau_step_us", raw.echo_tau_step_us.unwrap_or(0.25))?;
        if echo_tau_max_us / echo_tau_step_us < 8.0 {
            return Err(o.err("echo_tau_step_us", "echo grid needs at least 8 delays"));
        }
        let wigner_points = at_least("wigner_points", raw.wigner_points.unwrap_or(101), 2)?;
        let wigner_span_sd = positive("wigner_span_sd", raw.wigner_span_sd.unwrap_or(8.0))?;
        let raman_pulse_ms = match raw.raman_pulse_ms {
            None => Some(0.1),
            Some(None) => None,
            Some(Some(t)) => Some(positive("raman_pulse_ms", t)?),
        };
        let raman_wavelength_nm = positive(
            "raman_wavelength_nm",
            raw.raman_wavelength_nm.unwrap_or(795.0),
        )?;
        let velocimetry_axes = raw
            .velocimetry_axes
            .unwrap_or_else(|| vec!["x_prime".into(), "y_prime".into()]);
        if velocimetry_axes.is_empty() {
            return Err(o.err("velocimetry_axes", "needs at least one axis"));
        }
        for axis in &velocimetry_axes {
            axis.parse::<ScanAxis>()
                .map_err(|e| o.err("velocimetry_axes", e))?;
        }
        let velocimetry_points = at_least(
            "velocimetry_points",
            raw.velocimetry_points.unwrap_or(41),
            5,
        )?;
        let velocimetry_span_sd = positive(
            "velocimetry_span_sd",
            raw.velocimetry_span_sd.unwrap_or(4.0),
        )?;
        let velocimetry_noise = nonneg("velocimetry_noise", raw.velocimetry_noise.unwrap_or(0.02))?;
        let velocimetry_time_us = nonneg(
            "velocimetry_time_us",
            raw.velocimetry_time_us.unwrap_or(0.0),
        )?;

        let scenario = Self {
            mass_amu,
            omega_khz,
            omega_prime_khz,
            r,
            r_source,
            relative_phase_rad,
            nbar0,
            rabi_01_khz,
            lamb_dicke,
            gamma_khz,
            pulse_ms,
            sigma_omega_rad_s,
            target_decay_us,
            quadrature_order,
            n_max,
            l_cap,
            criteria_time_us,
            widths_periods,
            widths_points,
            ratio_r_max,
            ratio_r_step,
            echo_tau_max_us,
            echo_tau_step_us,
            wigner_points,
            wigner_span_sd,
            raman_pulse_ms,
            raman_wavelength_nm,
            velocimetry_axes,
            velocimetry_points,
            velocimetry_span_sd,
            velocimetry_noise,
            velocimetry_time_us,
            seed: raw.seed.unwrap_or(0),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        };
        // Surface engine-level rejections as config errors too.
        scenario.oscillator().map_err(|e| o.err("omega_khz", e))?;
        scenario.sideband().map_err(|e| o.err("rabi_01_khz", e))?;
        scenario
            .inhomogeneity()
            .map_err(|e| o.err("quadrature_order", e))?;
        Ok(scenario)
    }

    /// SHA-256 over the canonical resolved form; output location and seed
    /// are excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn oscillator(&self) -> tmsq_core::Result<OscillatorConfig> {
        OscillatorConfig::new(
            self.mass_amu * ATOMIC_MASS_UNIT,
            TAU * self.omega_khz * 1e3,
            TAU * self.omega_prime_khz * 1e3,
        )
    }

    pub fn sideband(&self) -> tmsq_core::Result<SidebandModel> {
        SidebandModel::new(
            TAU * self.rabi_01_khz * 1e3,
            self.lamb_dicke,
            self.gamma_khz * 1e3,
            self.pulse_ms * 1e-3,
        )
    }

    pub fn inhomogeneity(&self) -> tmsq_core::Result<InhomogeneityModel> {
        InhomogeneityModel::new(
            self.sigma_omega_rad_s,
            Averaging::GaussHermite {
                order: self.quadrature_order,
            },
        )
    }

    pub fn k_eff(&self) -> f64 {
        2.0 * TAU / (self.raman_wavelength_nm * 1e-9)
    }

    pub fn axes(&self) -> Vec<ScanAxis> {
        self.velocimetry_axes
            .iter()
            .map(|a| a.parse().expect("validated on load"))
            .collect()
    }

    /// `r` grid for the ratio sweep, `0, step, …` up to `ratio_r_max`.
    pub fn ratio_grid(&self) -> Vec<f64> {
        let n = (self.ratio_r_max / self.ratio_r_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.ratio_r_step).collect()
    }

    pub fn echo_grid(&self) -> Vec<f64> {
        let n = (self.echo_tau_max_us / self.echo_tau_step_us + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| k as f64 * self.echo_tau_step_us * 1e-6)
            .collect()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.omega_khz * 1e3
    }
}
