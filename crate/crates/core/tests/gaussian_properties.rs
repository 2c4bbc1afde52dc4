use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmsq_core::gaussian::{
    duan_simon_value, epr_product, output_momentum_width, pair_momentum_uncertainties,
    wigner_projection, GridSpec,
};
use tmsq_core::{GaussianState, SqueezeParams};

#[derive(Debug, Clone, Copy)]
enum Op {
    Squeeze { mode: usize, r: f64, theta: f64 },
    Rotate { mode: usize, phi: f64 },
    Split,
}

impl Op {
    fn apply(self, s: &GaussianState) -> GaussianState {
        match self {
            Op::Squeeze { mode, r, theta } => {
                s.apply_squeeze(mode, SqueezeParams::new(r, theta).unwrap())
            }
            Op::Rotate { mode, phi } => s.apply_rotation(mode, phi),
            Op::Split => s.apply_beam_splitter_50_50(0, 1),
        }
        .unwrap()
    }

    fn inverse(self, s: &GaussianState) -> GaussianState {
        match self {
            Op::Squeeze { mode, r, theta } => {
                s.apply_squeeze(mode, SqueezeParams::new(r, theta + FRAC_PI_2).unwrap())
            }
            Op::Rotate { mode, phi } => s.apply_rotation(mode, -phi),
            Op::Split => {
                // The 45° splitter has order 8.
                let mut out = s.clone();
                for _ in 0..7 {
                    out = out.apply_beam_splitter_50_50(0, 1).unwrap();
                }
                Ok(out)
            }
        }
        .unwrap()
    }
}

fn op_strategy(max_r: f64) -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..2, 0.0..max_r, 0.0..TAU).prop_map(|(mode, r, theta)| Op::Squeeze {
            mode,
            r,
            theta
        }),
        (0usize..2, -TAU..TAU).prop_map(|(mode, phi)| Op::Rotate { mode, phi }),
        Just(Op::Split),
    ]
}

fn total_squeeze(ops: &[Op]) -> f64 {
    ops.iter()
        .map(|op| match op {
            Op::Squeeze { r, .. } => *r,
            _ => 0.0,
        })
        .sum()
}

/// Vacuum through squeezers at `(θx, θy)` and the 45° splitter.
fn pipeline(r: f64, theta_x: f64, theta_y: f64) -> GaussianState {
    GaussianState::vacuum(2)
        .unwrap()
        .apply_squeeze(0, SqueezeParams::new(r, theta_x).unwrap())
        .unwrap()
        .apply_squeeze(1, SqueezeParams::new(r, theta_y).unwrap())
        .unwrap()
        .apply_beam_splitter_50_50(0, 1)
        .unwrap()
}

proptest! {
    #[test]
    fn determinant_is_invariant(
        ops in prop::collection::vec(op_strategy(2.0), 0..8)
            .prop_filter("total squeezing within double-precision conditioning", |ops| total_squeeze(ops) <= 3.5)
    ) {
        let mut s = GaussianState::vacuum(2).unwrap();
        for op in &ops {
            s = op.apply(&s);
        }
        let det = s.cov().determinant();
        prop_assert!((det / (0.25f64).powi(4) - 1.0).abs() < 1e-10, "det {det}");
    }

    #[test]
    fn pure_states_stay_pure(ops in prop::collection::vec(op_strategy(1.5), 0..8)) {
        let mut s = GaussianState::vacuum(2).unwrap();
        for op in &ops {
            s = op.apply(&s);
        }
        for nu in s.symplectic_eigenvalues() {
            prop_assert!((nu - 0.25).abs() < 1e-8, "{nu}");
        }
    }

    #[test]
    fn output_width_matches_engine(r in 0.0..2.0f64, tx in 0.0..TAU, ty in 0.0..TAU) {
        let s = pipeline(r, tx, ty);
        prop_assert!((s.p_variance(0).sqrt() - output_momentum_width(r, tx, ty)).abs() < 1e-10);
    }

    #[test]
    fn pair_uncertainties_match_engine(r in 0.0..2.0f64, tx in 0.0..TAU) {
        let s = pipeline(r, tx, tx + FRAC_PI_2);
        let u = pair_momentum_uncertainties(r, tx);
        let diff = s.combination_variance(&[0.0, 1.0, 0.0, -1.0]).sqrt();
        let sum = s.combination_variance(&[0.0, 1.0, 0.0, 1.0]).sqrt();
        prop_assert!((diff - u.diff).abs() < 1e-10);
        prop_assert!((sum - u.sum).abs() < 1e-10);
    }

    #[test]
    fn output_width_is_flat_in_common_phase_at_quadrature(r in 0.0..2.0f64, offset in 0.0..TAU) {
        let values: Vec<f64> = (0..64)
            .map(|k| {
                let wt = k as f64 * PI / 32.0;
                output_momentum_width(r, wt + offset + FRAC_PI_2, wt + offset)
            })
            .collect();
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        prop_assert!(max - min < 1e-12);
    }

    #[test]
    fn criteria_are_invariant_under_counter_rotation(r in 0.0..1.8f64, phi in -PI..PI) {
        // EPR-optimal pipeline: (θx, θy) = (0, π/2).
        let s = pipeline(r, 0.0, FRAC_PI_2);
        let t = s.apply_rotation(0, phi).unwrap().apply_rotation(1, -phi).unwrap();
        let (d0, e0) = (duan_simon_value(&s, 0, 1).unwrap(), epr_product(&s, 0, 1).unwrap());
        let (d1, e1) = (duan_simon_value(&t, 0, 1).unwrap(), epr_product(&t, 0, 1).unwrap());
        prop_assert!((d0 - d1).abs() < 1e-12 * d0.max(1.0));
        prop_assert!((e0 - e1).abs() < 1e-12 * e0.max(1.0));
        prop_assert!((d0 - (-2.0 * r).exp()).abs() < 1e-12);
    }

    #[test]
    fn product_criterion_never_beats_sum_criterion(ops in prop::collection::vec(op_strategy(1.5), 0..6)) {
        // (Δu·Δv) ≤ (Δ²u + Δ²v)/2 by AM–GM, for any state.
        let mut s = GaussianState::vacuum(2).unwrap();
        for op in &ops {
            s = op.apply(&s);
        }
        let d = duan_simon_value(&s, 0, 1).unwrap();
        let e = epr_product(&s, 0, 1).unwrap();
        prop_assert!(e <= 0.5 * d + 1e-12);
    }
}

#[test]
fn covariance_stays_positive_definite_over_ten_thousand_operations() {
    // Random walk over products of at most three generators: each step either
    // applies a fresh random operation or undoes the most recent one, so the
    // conditioning stays within double precision while every kind of
    // operation, including r up to 2, is exercised 10⁴ times.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut state = GaussianState::vacuum(2).unwrap();
    let mut stack: Vec<Op> = Vec::new();
    for _ in 0..10_000 {
        let push = stack.is_empty() || (stack.len() < 3 && rng.random_bool(0.5));
        if push {
            let op = match rng.random_range(0..3) {
                0 => Op::Squeeze {
                    mode: rng.random_range(0..2),
                    r: rng.random_range(0.0..2.0),
                    theta: rng.random_range(0.0..TAU),
                },
                1 => Op::Rotate {
                    mode: rng.random_range(0..2),
                    phi: rng.random_range(-TAU..TAU),
                },
                _ => Op::Split,
            };
            state = op.apply(&state);
            stack.push(op);
        } else {
            state = stack.pop().unwrap().inverse(&state);
        }
        let cov = state.cov();
        assert_eq!(cov, &cov.transpose());
        assert!(cov.clone().cholesky().is_some());
        // Rounding in σ moves ν by about eps·κ, κ ≈ (4‖σ‖)².
        let tol = 1e-9f64.max(1e-15 * (4.0 * cov.amax()).powi(2));
        let nus = state.symplectic_eigenvalues();
        assert!(
            nus.iter().all(|nu| *nu >= 0.25 - tol),
            "{nus:?} at ‖σ‖ = {}",
            cov.amax()
        );
    }
    while let Some(op) = stack.pop() {
        state = op.inverse(&state);
    }
    let vac = GaussianState::vacuum(2).unwrap();
    assert!((state.cov() - vac.cov()).amax() < 1e-6);
}

#[test]
fn two_mode_projections() {
    let r: f64 = 0.89;
    let s = pipeline(r, 0.0, FRAC_PI_2);
    let grid = GridSpec::square(6.0 * (2.0 * r).cosh().sqrt() / 2.0, 121);

    // p̄x′–x̄′: isotropic, variance cosh 2r / 4, no correlation.
    let own = wigner_projection(&s, (0, 1), &grid).unwrap();
    assert!((own.integral() - 1.0).abs() < 0.01);
    let block = s.mode_block(0);
    assert!((block[(0, 0)] - (2.0 * r).cosh() / 4.0).abs() < 1e-12);
    assert!((block[(1, 1)] - (2.0 * r).cosh() / 4.0).abs() < 1e-12);
    assert!(block[(0, 1)].abs() < 1e-12);

    // p̄y′–p̄x′: tilted, correlation coefficient −tanh 2r.
    let cross = s.cov();
    let rho = cross[(1, 3)] / (cross[(1, 1)] * cross[(3, 3)]).sqrt();
    assert!((rho.abs() - (2.0 * r).tanh()).abs() < 1e-12, "{rho}");
    let tilted = wigner_projection(&s, (1, 3), &grid).unwrap();
    assert!((tilted.integral() - 1.0).abs() < 0.01);
}
