//! One function per subcommand. Each writes its artifacts into the
//! scenario's output directory and returns the one-line summary.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde_json::json;
use tmsq_core::fit::{fit_damped_sinusoid, Envelope};
use tmsq_core::fock::{phonon_stats, squeezed_thermal_distribution, thermal_weighted_distribution};
use tmsq_core::gaussian::{
    duan_simon_value, epr_product, epr_surrogate, wigner_projection, GridSpec, EPR_THRESHOLD,
    SEPARABLE_BOUND,
};
use tmsq_core::protocol::{echo_ratio_vs_delay, two_mode_protocol_thermal, TwoModeEvolution};
use tmsq_core::spectroscopy::{
    gaussian_fit, ratio_r, ratio_r_1d, synthesize_velocity_scan, velocity_width, DetuningGrid,
    ScanNoise, VelocityScanOptions,
};
use tmsq_core::{FockAxis, FockDistribution, OscillatorConfig, ScanAxis, Trace, TwoModeSqueezeOp};

use crate::output::Artifacts;
use crate::{CliError, Op, Scenario};

const CM: f64 = 100.0;
const US: f64 = 1e-6;

fn evolution(
    s: &Scenario,
    cfg: &OscillatorConfig,
    phase: f64,
) -> Result<TwoModeEvolution, CliError> {
    two_mode_protocol_thermal(cfg, phase, s.nbar0).op("two_mode_protocol")
}

pub fn widths(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    let quad = evolution(s, &cfg, FRAC_PI_2)?;
    let in_phase = evolution(s, &cfg, 0.0)?;
    let span = s.widths_periods * cfg.period();
    let mut trace = Trace::new([
        "t_us",
        "width_quadrature_cm_s",
        "width_in_phase_cm_s",
        "vacuum_cm_s",
    ])
    .with_meta("r", s.r)
    .with_meta("nbar0", s.nbar0)
    .with_meta("axis", ScanAxis::XPrime.name());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..s.widths_points {
        let t = if s.widths_points > 1 {
            span * k as f64 / (s.widths_points - 1) as f64
        } else {
            0.0
        };
        let a = velocity_width(
            &quad.lab_state_at(t).op("state_at")?,
            ScanAxis::XPrime,
            &cfg,
        )
        .op("velocity_width")?;
        let b = velocity_width(
            &in_phase.lab_state_at(t).op("state_at")?,
            ScanAxis::XPrime,
            &cfg,
        )
        .op("velocity_width")?;
        lo = lo.min(b);
        hi = hi.max(b);
        trace.push(vec![t / US, a * CM, b * CM, cfg.dv0() * CM]);
    }
    let first = trace.rows.first().map(|r| r[1]).unwrap_or(f64::NAN);
    let mut out = Artifacts::new(s, "widths")?;
    out.trace("widths.csv", trace)?;
    Ok(format!(
        "widths: r={:.3} quadrature phase {:.3} cm/s, in phase {:.3}..{:.3} cm/s, vacuum {:.3} cm/s -> {}",
        s.r,
        first,
        lo * CM,
        hi * CM,
        cfg.dv0() * CM,
        out.listing()
    ))
}

pub fn criteria(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    let evo = evolution(s, &cfg, s.relative_phase_rad)?;
    let state = evo.state_at(s.criteria_time_us * US).op("state_at")?;
    let duan = duan_simon_value(&state, 0, 1).op("duan_simon_value")?;
    let epr = epr_product(&state, 0, 1).op("epr_product")?;
    let steering = epr < EPR_THRESHOLD;
    let verdict = if steering {
        "steering: yes"
    } else {
        "steering: no"
    };
    let report = json!({
        "r": s.r,
        "nbar0": s.nbar0,
        "relative_phase_rad": s.relative_phase_rad,
        "time_us": s.criteria_time_us,
        "duan_simon": duan,
        "separable_bound": SEPARABLE_BOUND,
        "inseparable": duan < SEPARABLE_BOUND,
        "epr_product": epr,
        "epr_threshold": EPR_THRESHOLD,
        "ideal_vacuum_epr_product": epr_surrogate(s.r),
        "verdict": verdict,
    });
    let mut out = Artifacts::new(s, "criteria")?;
    out.json("criteria.json", &report)?;
    Ok(format!(
        "criteria: duan={duan:.4} (bound {SEPARABLE_BOUND}) epr={epr:.5} (bound {EPR_THRESHOLD}) {verdict} -> {}",
        out.listing()
    ))
}

fn axis_stats(dist: &FockDistribution) -> serde_json::Value {
    let (mx, vx) = phonon_stats(dist, FockAxis::X);
    let (my, vy) = phonon_stats(dist, FockAxis::Y);
    json!({
        "mean_x": mx, "variance_x": vx,
        "mean_y": my, "variance_y": vy,
        "total": dist.total(),
        "truncation_mass": dist.truncation_mass(),
    })
}

pub fn fock(s: &Scenario) -> Result<String, CliError> {
    let op = TwoModeSqueezeOp::with_cap(s.r, 0.0, s.l_cap).op("two_mode_squeeze")?;
    let tmsv =
        thermal_weighted_distribution(&op, s.nbar0, s.n_max).op("thermal_weighted_distribution")?;
    let single =
        squeezed_thermal_distribution(s.r, s.nbar0, s.n_max).op("squeezed_thermal_distribution")?;
    let smsv = FockDistribution::from_x_marginal(&single);
    let (_, var_two) = phonon_stats(&tmsv, FockAxis::X);
    let (_, var_one) = single.stats();
    let ratio = var_one / var_two;
    let report = json!({
        "r": s.r,
        "nbar0": s.nbar0,
        "n_max": s.n_max,
        "l_cap": s.l_cap,
        "tmsv": axis_stats(&tmsv),
        "smsv": axis_stats(&smsv),
        "variance_ratio_smsv_over_tmsv": ratio,
    });
    let mut out = Artifacts::new(s, "fock")?;
    out.fock_table("fock_tmsv.csv", &tmsv)?;
    out.fock_table("fock_smsv.csv", &smsv)?;
    out.json("fock.json", &report)?;
    Ok(format!(
        "fock: r={:.3} n_max={} variance ratio smsv/tmsv={ratio:.4} truncation tmsv={:.2e} smsv={:.2e} -> {}",
        s.r,
        s.n_max,
        tmsv.truncation_mass(),
        smsv.truncation_mass(),
        out.listing()
    ))
}

pub fn ratio(s: &Scenario) -> Result<String, CliError> {
    let model = s.sideband().op("sideband_model")?;
    let mut trace = Trace::new(["r", "ratio_tmsv", "ratio_smsv"])
        .with_meta("nbar0", s.nbar0)
        .with_meta("n_max", s.n_max)
        .with_meta("l_cap", s.l_cap);
    for r in s.ratio_grid() {
        let op = TwoModeSqueezeOp::with_cap(r, 0.0, s.l_cap).op("two_mode_squeeze")?;
        let two = thermal_weighted_distribution(&op, s.nbar0, s.n_max)
            .op("thermal_weighted_distribution")?;
        let one = squeezed_thermal_distribution(r, s.nbar0, s.n_max)
            .op("squeezed_thermal_distribution")?;
        trace.push(vec![
            r,
            ratio_r(&two, &model).op("ratio_r")?,
            ratio_r_1d(&one, &model).op("ratio_r")?,
        ]);
    }
    let last = trace.rows.last().cloned().unwrap_or_default();
    let mut out = Artifacts::new(s, "ratio")?;
    out.trace("ratio.csv", trace)?;
    Ok(format!(
        "ratio: {} points, at r={:.2} R_tmsv={:.4} R_smsv={:.4} -> {}",
        s.ratio_grid().len(),
        last.first().copied().unwrap_or(f64::NAN),
        last.get(1).copied().unwrap_or(f64::NAN),
        last.get(2).copied().unwrap_or(f64::NAN),
        out.listing()
    ))
}

pub fn echo(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    let model = s.sideband().op("sideband_model")?;
    let inhom = s.inhomogeneity().op("inhomogeneity_model")?;
    let taus = s.echo_grid();
    let points =
        echo_ratio_vs_delay(s.r, s.nbar0, &taus, &cfg, &inhom, &model).op("echo_ratio_vs_delay")?;
    let ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let gauss = fit_damped_sinusoid(&ts, &ys, Envelope::Gaussian).op("fit_damped_sinusoid")?;
    let expo = fit_damped_sinusoid(&ts, &ys, Envelope::Exponential).op("fit_damped_sinusoid")?;
    let mut trace = Trace::new(["tau_us", "ratio"])
        .with_meta("r", s.r)
        .with_meta("sigma_omega_rad_s", s.sigma_omega_rad_s);
    for (t, y) in &points {
        trace.push(vec![t / US, *y]);
    }
    let summarize = |f: &tmsq_core::fit::DampedSinusoidFit| {
        json!({
            "decay_time_us": f.decay_time / US,
            "period_us": f.period() / US,
            "fit": f,
        })
    };
    let report = json!({
        "sigma_omega_rad_s": s.sigma_omega_rad_s,
        "target_decay_us": s.target_decay_us,
        "gaussian": summarize(&gauss),
        "exponential": summarize(&expo),
    });
    let mut out = Artifacts::new(s, "echo")?;
    out.trace("echo.csv", trace)?;
    out.json("echo_fit.json", &report)?;
    Ok(format!(
        "echo: {} delays, 1/e decay {:.2} us, period {:.4} us -> {}",
        taus.len(),
        gauss.decay_time / US,
        gauss.period() / US,
        out.listing()
    ))
}

/// Quadrature pairs plotted as Wigner projections, by interleaved index.
const WIGNER_PAIRS: [((usize, usize), &str); 3] = [
    ((0, 1), "xprime_pxprime"),
    ((1, 3), "pxprime_pyprime"),
    ((0, 2), "xprime_yprime"),
];

pub fn wigner(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    let state = evolution(s, &cfg, s.relative_phase_rad)?
        .state_at(s.criteria_time_us * US)
        .op("state_at")?;
    let mut out = Artifacts::new(s, "wigner")?;
    let mut integrals = Vec::new();
    for ((i, j), name) in WIGNER_PAIRS {
        let sd = state.cov()[(i, i)].max(state.cov()[(j, j)]).sqrt();
        let grid = GridSpec::square(s.wigner_span_sd * sd, s.wigner_points);
        let w = wigner_projection(&state, (i, j), &grid).op("wigner_projection")?;
        let mut trace = Trace::new(["a", "b", "w"])
            .with_meta("axes", format!("{i},{j}"))
            .with_meta("time_us", s.criteria_time_us);
        for (a, row) in w.a_axis.iter().zip(&w.values) {
            for (b, v) in w.b_axis.iter().zip(row) {
                trace.push(vec![*a, *b, *v]);
            }
        }
        integrals.push(w.integral());
        out.trace(&format!("wigner_{name}.csv"), trace)?;
    }
    Ok(format!(
        "wigner: {} projections on {}x{} grids, integrals {} -> {}",
        WIGNER_PAIRS.len(),
        s.wigner_points,
        s.wigner_points,
        integrals
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
            .join("/"),
        out.listing()
    ))
}

pub fn velocimetry(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    let state = evolution(s, &cfg, s.relative_phase_rad)?
        .lab_state_at(s.velocimetry_time_us * US)
        .op("state_at")?;
    let k_eff = s.k_eff();
    let mut out = Artifacts::new(s, "velocimetry")?;
    let mut reports = serde_json::Map::new();
    let mut parts = Vec::new();
    for (idx, axis) in s.axes().into_iter().enumerate() {
        let truth = velocity_width(&state, axis, &cfg).op("velocity_width")?;
        let grid =
            DetuningGrid::symmetric(s.velocimetry_span_sd * k_eff * truth, s.velocimetry_points);
        let opts = VelocityScanOptions {
            k_eff,
            pulse_duration: s.raman_pulse_ms.map(|ms| ms * 1e-3),
            noise: (s.velocimetry_noise > 0.0).then(|| ScanNoise {
                relative_sd: s.velocimetry_noise,
                seed: s.seed.wrapping_add(idx as u64),
            }),
            ..Default::default()
        };
        let scan = synthesize_velocity_scan(&state, axis, &cfg, &grid, &opts)
            .op("synthesize_velocity_scan")?;
        let fit = gaussian_fit(&scan).op("gaussian_fit")?;
        let mut trace =
            Trace::new(["detuning_hz", "velocity_cm_s", "fraction"]).with_meta("axis", axis.name());
        for (d, f) in scan.detunings.iter().zip(&scan.excited_fraction) {
            trace.push(vec![d / TAU, d / k_eff * CM, *f]);
        }
        out.trace(&format!("velocimetry_{}.csv", axis.name()), trace)?;
        parts.push(format!(
            "{} {:.3}({:.0}) cm/s vs {:.3}",
            axis.name(),
            fit.sigma_velocity * CM,
            fit.sigma_velocity_err * CM * 1e3,
            truth * CM
        ));
        reports.insert(
            axis.name().into(),
            json!({
                "true_width_cm_s": truth * CM,
                "fitted_width_cm_s": fit.sigma_velocity * CM,
                "fitted_width_err_cm_s": fit.sigma_velocity_err * CM,
                "noise_seed": scan.noise_seed,
                "fit": fit,
            }),
        );
    }
    out.json("velocimetry.json", &reports)?;
    Ok(format!(
        "velocimetry: {} -> {}",
        parts.join(", "),
        out.listing()
    ))
}

pub fn validate(s: &Scenario) -> Result<String, CliError> {
    let cfg = s.oscillator().op("oscillator")?;
    s.sideband().op("sideband_model")?;
    let inhom = s.inhomogeneity().op("inhomogeneity_model")?;
    let decay = if inhom.sigma_omega() > 0.0 {
        format!("{:.2} us", inhom.decay_time() / US)
    } else {
        "none".into()
    };
    Ok(format!(
        "valid: r={:.2} ({}) dv0={:.2} cm/s period={:.3} us sigma_omega={:.1} rad/s (envelope {decay}) seed={} hash={}",
        s.r,
        serde_json::to_value(s.r_source).expect("enum serializes").as_str().unwrap_or(""),
        cfg.dv0() * CM,
        cfg.period() / US,
        s.sigma_omega_rad_s,
        s.seed,
        s.hash()
    ))
}
