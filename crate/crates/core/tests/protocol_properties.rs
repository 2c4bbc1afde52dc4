use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Cursor;

use nalgebra::{Matrix2, SymmetricEigen};
use proptest::prelude::*;
use tmsq_core::fock::gaussian_phonon_probs;
use tmsq_core::protocol::{
    echo_ratio_vs_delay, echo_state, single_mode_jump_protocol, two_mode_protocol,
    ECHO_MASS_TOLERANCE, ECHO_PHONON_LIMIT,
};
use tmsq_core::spectroscopy::populations_from_probs;
use tmsq_core::{
    GaussianState, InhomogeneityModel, OscillatorConfig, SidebandModel, SqueezeParams, Trace,
};

fn config(r: f64) -> OscillatorConfig {
    OscillatorConfig::rb85_with_jump(r).unwrap()
}

/// Eigenvalues (ascending) and the unit eigenvector of the larger one.
fn eigen(m: Matrix2<f64>) -> ([f64; 2], [f64; 2]) {
    let eig = SymmetricEigen::new(m);
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let v = eig.eigenvectors.column(hi);
    // Fix the sign so the comparison is orientation-free.
    let s = if v[0].abs() > 1e-8 {
        v[0].signum()
    } else {
        v[1].signum()
    };
    (
        [eig.eigenvalues[lo], eig.eigenvalues[hi]],
        [s * v[0], s * v[1]],
    )
}

proptest! {
    #[test]
    fn jump_sequence_is_a_rotated_squeeze(r in 0.0..2.0f64) {
        let cfg = config(r);
        let (out, _) = single_mode_jump_protocol(&cfg).unwrap();
        let direct = GaussianState::vacuum(1)
            .unwrap()
            .apply_squeeze(0, SqueezeParams::new((cfg.omega() / cfg.omega_prime()).ln(), 0.0).unwrap())
            .unwrap();
        // Spectra agree: the two states differ only by a rotation.
        let (vals_out, vec_out) = eigen(out.mode_block(0));
        let (vals_dir, _) = eigen(direct.mode_block(0));
        for k in 0..2 {
            prop_assert!((vals_out[k] - vals_dir[k]).abs() < 1e-10);
        }
        prop_assert!((vals_dir[0] - (-2.0 * r).exp() / 4.0).abs() < 1e-10);
        // The anti-squeezed axis of the output is x̄: the rotation is a quarter turn.
        if r > 1e-3 {
            prop_assert!((vec_out[0] - 1.0).abs() < 1e-10 && vec_out[1].abs() < 1e-10, "{vec_out:?}");
            let rotated = direct.apply_rotation(0, FRAC_PI_2).unwrap();
            prop_assert!((rotated.cov() - out.cov()).amax() < 1e-10);
        }
    }
}

#[test]
fn quadrature_phase_output_is_flat_and_isotropic() {
    for r in [0.3, 0.89, 1.21] {
        let cfg = config(r);
        let evo = two_mode_protocol(&cfg, FRAC_PI_2).unwrap();
        let expected = (2.0 * r).cosh() / 4.0;
        let mut max_dev: f64 = 0.0;
        for k in 0..=400 {
            let t = 2.0 * cfg.period() * k as f64 / 400.0;
            let s = evo.state_at(t).unwrap();
            for mode in 0..2 {
                max_dev = max_dev.max((s.x_variance(mode) - expected).abs());
                max_dev = max_dev.max((s.p_variance(mode) - expected).abs());
            }
        }
        assert!(max_dev < 1e-10, "r {r}: {max_dev}");
    }
}

#[test]
fn in_phase_output_factorizes() {
    for r in [0.3, 0.89, 1.21] {
        let cfg = config(r);
        let evo = two_mode_protocol(&cfg, 0.0).unwrap();
        for k in 0..=400 {
            let t = 2.0 * cfg.period() * k as f64 / 400.0;
            let cross = evo.state_at(t).unwrap().cross_block(0, 1);
            assert!(cross.amax() < 1e-10, "r {r} t {t}: {cross}");
        }
    }
}

#[test]
fn in_phase_width_breathes_at_twice_the_trap_frequency() {
    let r = 0.89;
    let cfg = config(r);
    let evo = two_mode_protocol(&cfg, 0.0).unwrap();
    for k in 0..=200 {
        let t = cfg.period() * k as f64 / 100.0;
        let width = evo.state_at(t).unwrap().p_variance(0).sqrt();
        // t = 0 is the end of the sequence, where p̄ is squeezed.
        let wt = cfg.omega() * t + FRAC_PI_2;
        let expected = ((2.0 * r).cosh() + (2.0 * r).sinh() * (2.0 * wt).cos()).sqrt() / 2.0;
        assert!(
            (width - expected).abs() < 1e-10,
            "t {t}: {width} vs {expected}"
        );
    }
}

#[test]
fn undamped_echo_matches_a_single_site() {
    let (r, nbar0) = (1.2, 0.06);
    let cfg = config(r);
    let sideband = SidebandModel::experiment_defaults();
    let taus: Vec<f64> = (0..40).map(|k| k as f64 * 0.25e-6).collect();
    let trace = echo_ratio_vs_delay(
        r,
        nbar0,
        &taus,
        &cfg,
        &InhomogeneityModel::none(),
        &sideband,
    )
    .unwrap();
    for (tau, ratio) in trace {
        let state = echo_state(r, nbar0, cfg.omega() * tau).unwrap();
        let probs = gaussian_phonon_probs(&state, ECHO_MASS_TOLERANCE, ECHO_PHONON_LIMIT).unwrap();
        let (plus, minus) = populations_from_probs(&probs, &sideband);
        assert_eq!(ratio, minus / plus, "τ {tau}");
    }
}

#[test]
fn echo_envelope_decays_monotonically() {
    // Peak-to-peak swing in each 4 μs breathing period, out to 1.25 envelope
    // times; later periods sit at the resolution of the 21-node ensemble rule.
    let r = 1.2;
    let cfg = config(r);
    let inhom = InhomogeneityModel::from_decay_time(80e-6).unwrap();
    let taus: Vec<f64> = (0..400).map(|k| k as f64 * 0.25e-6).collect();
    let trace = echo_ratio_vs_delay(
        r,
        0.06,
        &taus,
        &cfg,
        &inhom,
        &SidebandModel::experiment_defaults(),
    )
    .unwrap();
    let ys: Vec<f64> = trace.iter().map(|p| p.1).collect();
    let swings: Vec<f64> = ys
        .chunks(16)
        .map(|c| {
            let hi = c.iter().copied().fold(f64::MIN, f64::max);
            let lo = c.iter().copied().fold(f64::MAX, f64::min);
            hi - lo
        })
        .collect();
    assert_eq!(swings.len(), 25);
    assert!(swings.windows(2).all(|w| w[1] < w[0]), "{swings:?}");
    assert!(swings[24] < 0.25 * swings[0]);
}

#[test]
fn echo_returns_to_the_ground_state_at_zero_delay() {
    let cfg = config(1.2);
    let inhom = InhomogeneityModel::from_decay_time(80e-6).unwrap();
    // Only without the uniform decay term does n = 0 leave the red sideband dark.
    let sideband = SidebandModel::experiment_defaults()
        .with_gamma(0.0)
        .unwrap();
    let trace = echo_ratio_vs_delay(1.2, 0.0, &[0.0], &cfg, &inhom, &sideband).unwrap();
    assert!(trace[0].1.abs() < 1e-12, "{}", trace[0].1);
    let period_samples: Vec<f64> = (0..4).map(|k| k as f64 * PI / cfg.omega()).collect();
    let undamped = echo_ratio_vs_delay(
        1.2,
        0.0,
        &period_samples,
        &cfg,
        &InhomogeneityModel::none(),
        &sideband,
    )
    .unwrap();
    for (tau, ratio) in undamped {
        assert!(ratio.abs() < 1e-9, "τ {tau}: {ratio}");
    }
}

#[test]
fn schedule_trace_round_trips() {
    let cfg = config(1.21);
    let evo = two_mode_protocol(&cfg, FRAC_PI_2).unwrap();
    let schedule = evo.merged_schedule();
    schedule.validate().unwrap();
    let mut trace = Trace::new(["time_us", "frequency_hz"]).with_meta("relative_phase", FRAC_PI_2);
    for row in schedule.rows() {
        trace.push(row.to_vec());
    }
    let text = trace.to_string_lossless();
    let back = Trace::read(Cursor::new(text.as_bytes())).unwrap();
    assert_eq!(back, trace);
    let times = back.column("time_us").unwrap();
    assert_eq!(times.len(), 4);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    let hold = 0.25 / (cfg.omega_prime() / (2.0 * PI)) * 1e6;
    assert!((times[2] - times[0] - hold).abs() < 1e-9, "{times:?}");
}

#[test]
fn quarter_period_later_momentum_difference_is_position_difference() {
    let cfg = config(0.88);
    let evo = two_mode_protocol(&cfg, FRAC_PI_2).unwrap();
    let quarter = cfg.period() / 4.0;
    for k in 0..20 {
        let t = cfg.period() * k as f64 / 20.0;
        let now = evo.state_at(t).unwrap();
        let later = evo.state_at(t + quarter).unwrap();
        let pos_diff = now.combination_variance(&[1.0, 0.0, -1.0, 0.0]);
        let mom_diff = later.combination_variance(&[0.0, 1.0, 0.0, -1.0]);
        assert!(
            (pos_diff - mom_diff).abs() < 1e-12,
            "t {t}: {pos_diff} vs {mom_diff}"
        );
    }
}
