//! Nonlinear least squares: a damped Gauss–Newton (Levenberg–Marquardt)
//! solver and the two models used in the analysis, a Gaussian peak on an
//! offset and a sinusoid under a decaying envelope.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Convergence threshold on `‖Jᵀr‖` in the solver's scaled coordinates.
    pub gradient_tol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tol: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmSolution {
    pub params: Vec<f64>,
    /// `(JᵀWJ)⁻¹` at the solution, unscaled by any residual variance.
    pub normal_inverse: DMatrix<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// A residual this close to orthogonal to the columns of `J`, measured as
/// `‖Jᵀr‖ / (‖J‖·‖r‖)`, counts as stationary. Cost changes below `eps·‖r‖²`
/// cannot be resolved, which puts the attainable ratio near `√eps`.
const ORTHOGONALITY_TOL: f64 = 1e-7;

fn stationarity_scale(jtj: &DMatrix<f64>, rss: f64) -> f64 {
    jtj.trace().sqrt() * rss.sqrt()
}

/// Minimizes `Σ wᵢ (model(p, xᵢ) − yᵢ)²`. `model` writes `∂f/∂p` into its
/// third argument and returns `f`.
pub fn levenberg_marquardt<F>(
    model: F,
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
    initial: &[f64],
    opts: &LmOptions,
) -> Result<LmSolution>
where
    F: Fn(&[f64], f64, &mut [f64]) -> f64,
{
    let n = xs.len();
    let np = initial.len();
    if ys.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(invalid("data arrays have different lengths"));
    }
    if n < np {
        return Err(Error::InvalidData(format!(
            "{n} points cannot fix {np} parameters"
        )));
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);

    let evaluate = |p: &[f64]| -> (DMatrix<f64>, DVector<f64>, f64) {
        let mut jac = DMatrix::zeros(n, np);
        let mut res = DVector::zeros(n);
        let mut grad = vec![0.0; np];
        let mut rss = 0.0;
        for i in 0..n {
            let sw = weight(i).sqrt();
            let f = model(p, xs[i], &mut grad);
            let ri = sw * (f - ys[i]);
            res[i] = ri;
            rss += ri * ri;
            for k in 0..np {
                jac[(i, k)] = sw * grad[k];
            }
        }
        (jac, res, rss)
    };

    let mut params = initial.to_vec();
    let (mut jac, mut res, mut rss) = evaluate(&params);
    let mut lambda = opts.initial_lambda;
    let mut gradient_norm = f64::INFINITY;
    for iteration in 0..=opts.max_iterations {
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &res;
        gradient_norm = g.norm();
        if !gradient_norm.is_finite() {
            break;
        }
        if gradient_norm
            < opts
                .gradient_tol
                .max(ORTHOGONALITY_TOL * stationarity_scale(&jtj, rss))
        {
            let normal_inverse =
                jtj.clone()
                    .try_inverse()
                    .ok_or_else(|| Error::NumericalDegeneracy {
                        op: "levenberg_marquardt",
                        detail: "singular normal matrix at the solution".into(),
                    })?;
            return Ok(LmSolution {
                params,
                normal_inverse,
                rss,
                gradient_norm,
                iterations: iteration,
            });
        }
        if iteration == opts.max_iterations {
            break;
        }
        // Inner loop: raise damping until the step lowers the cost.
        loop {
            let mut damped = jtj.clone();
            for k in 0..np {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = damped.cholesky().map(|c| c.solve(&(-&g)));
            if let Some(step) = step {
                let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let (tj, tr, trss) = evaluate(&trial);
                if trss.is_finite() && trss <= rss {
                    let stalled = trss == rss;
                    params = trial;
                    jac = tj;
                    res = tr;
                    rss = trss;
                    lambda = (lambda * 0.3).max(1e-15);
                    if !stalled {
                        break;
                    }
                }
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
        if lambda > 1e20 {
            // No descent direction left: accept if stationary at the noise floor.
            let g = jac.transpose() * &res;
            gradient_norm = g.norm();
            let scale = stationarity_scale(&(jac.transpose() * &jac), rss);
            if gradient_norm <= opts.gradient_tol.max(ORTHOGONALITY_TOL * scale) {
                let normal_inverse = (jac.transpose() * &jac).try_inverse().ok_or_else(|| {
                    Error::NumericalDegeneracy {
                        op: "levenberg_marquardt",
                        detail: "singular normal matrix at the solution".into(),
                    }
                })?;
                return Ok(LmSolution {
                    params,
                    normal_inverse,
                    rss,
                    gradient_norm,
                    iterations: iteration,
                });
            }
            break;
        }
    }
    Err(Error::FitFailure {
        iterations: opts.max_iterations,
        gradient_norm,
        residual_norm: rss.sqrt(),
    })
}

/// Parameters of `offset + amplitude · exp(−(x − center)² / 2σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianFit {
    pub center: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Standard errors in the same order: center, sigma, amplitude, offset.
    pub std_errors: [f64; 4],
    /// Asymptotic covariance, row-major 4×4 in the same order.
    pub covariance: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Fits a Gaussian peak. With `noise_sd` the covariance uses the known
/// measurement noise; otherwise it is scaled by `RSS / (N − 4)`.
pub fn fit_gaussian(xs: &[f64], ys: &[f64], noise_sd: Option<f64>) -> Result<GaussianFit> {
    fit_gaussian_with_response(xs, ys, noise_sd, &[(0.0, 1.0)])
}

/// Fits a Gaussian peak observed through a discretized instrument response:
/// the model is `offset + amplitude · Σₖ wₖ exp(−(x − uₖ − center)² / 2σ²)`
/// for `response = [(uₖ, wₖ)]` with `Σ wₖ = 1`. The returned parameters
/// describe the underlying peak, not the broadened one.
pub fn fit_gaussian_with_response(
    xs: &[f64],
    ys: &[f64],
    noise_sd: Option<f64>,
    response: &[(f64, f64)],
) -> Result<GaussianFit> {
    let n = xs.len();
    if n < 8 || ys.len() != n {
        return Err(Error::InvalidData(format!(
            "a Gaussian fit needs at least 8 points, got {n}"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite sample".into()));
    }
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_scale = y_max.abs().max(y_min.abs());
    if y_scale == 0.0 || (y_max - y_min) <= 1e-12 * y_scale {
        return Err(Error::InvalidData("flat data carries no peak".into()));
    }
    if x_max <= x_min {
        return Err(Error::InvalidData("all samples share one abscissa".into()));
    }

    // Work in scaled coordinates: u = (x − x₀)/sx, v = y / sy.
    let x0 = 0.5 * (x_min + x_max);
    let sx = 0.5 * (x_max - x_min);
    let sy = y_scale;
    let us: Vec<f64> = xs.iter().map(|x| (x - x0) / sx).collect();
    let vs: Vec<f64> = ys.iter().map(|y| y / sy).collect();

    // Moment-based start.
    let base = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let heights: Vec<f64> = vs.iter().map(|v| (v - base).max(0.0)).collect();
    let mass: f64 = heights.iter().sum();
    let c0 = us.iter().zip(&heights).map(|(u, h)| u * h).sum::<f64>() / mass;
    let var0 = us
        .iter()
        .zip(&heights)
        .map(|(u, h)| (u - c0).powi(2) * h)
        .sum::<f64>()
        / mass;
    let peak = heights.iter().copied().fold(0.0, f64::max);
    let initial = [c0, var0.sqrt().max(1e-3), peak, base];

    if response.is_empty()
        || response
            .iter()
            .any(|(u, w)| !(u.is_finite() && w.is_finite()))
    {
        return Err(invalid(
            "instrument response must be a nonempty list of finite nodes",
        ));
    }
    let kernel: Vec<(f64, f64)> = response.iter().map(|&(u, w)| (u / sx, w)).collect();
    let model = |p: &[f64], u: f64, grad: &mut [f64]| {
        let (c, s, a) = (p[0], p[1], p[2]);
        let (mut e_sum, mut ez_sum, mut ezz_sum) = (0.0, 0.0, 0.0);
        for &(shift, w) in &kernel {
            let z = (u - shift - c) / s;
            let e = w * (-0.5 * z * z).exp();
            e_sum += e;
            ez_sum += e * z;
            ezz_sum += e * z * z;
        }
        grad[0] = a * ez_sum / s;
        grad[1] = a * ezz_sum / s;
        grad[2] = e_sum;
        grad[3] = 1.0;
        p[3] + a * e_sum
    };
    let weights = noise_sd.map(|sd| vec![(sy / sd).powi(2); n]);
    let sol = levenberg_marquardt(
        model,
        &us,
        &vs,
        weights.as_deref(),
        &initial,
        &LmOptions::default(),
    )?;

    let variance_scale = if noise_sd.is_some() {
        1.0
    } else {
        sol.rss / (n - 4) as f64
    };
    let jac_scale = [sx, sx, sy, sy];
    let mut covariance = vec![0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            covariance[i * 4 + j] =
                variance_scale * sol.normal_inverse[(i, j)] * jac_scale[i] * jac_scale[j];
        }
    }
    let std_errors = [0, 1, 2, 3].map(|k| covariance[k * 4 + k].max(0.0).sqrt());
    let sigma = sol.params[1].abs() * sx;
    if x_max - x_min < 3.0 * sigma {
        return Err(Error::InvalidData(format!(
            "scan spans {:.3e}, less than 3σ = {:.3e}",
            x_max - x_min,
            3.0 * sigma
        )));
    }
    let residual_norm = match noise_sd {
        Some(sd) => sol.rss.sqrt() * sd,
        None => sol.rss.sqrt() * sy,
    };
    Ok(GaussianFit {
        center: x0 + sol.params[0] * sx,
        sigma,
        amplitude: sol.params[2] * sy,
        offset: sol.params[3] * sy,
        std_errors,
        covariance,
        residual_norm,
        iterations: sol.iterations,
    })
}

/// Envelope of a decaying oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(−(t/τ)²)`, produced by Gaussian frequency dephasing.
    Gaussian,
    /// `exp(−t/τ)`.
    Exponential,
}

/// `offset + amplitude · envelope(t/τ) · cos(ω t + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampedSinusoidFit {
    pub envelope: Envelope,
    pub offset: f64,
    pub amplitude: f64,
    /// 1/e time of the envelope.
    pub decay_time: f64,
    pub angular_frequency: f64,
    pub phase: f64,
    pub residual_norm: f64,
}

impl DampedSinusoidFit {
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.angular_frequency
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let env = match self.envelope {
            Envelope::Gaussian => (-(t / self.decay_time).powi(2)).exp(),
            Envelope::Exponential => (-t / self.decay_time).exp(),
        };
        self.offset + self.amplitude * env * (self.angular_frequency * t + self.phase).cos()
    }
}

/// Fits a decaying sinusoid to a uniformly or nonuniformly sampled trace.
/// The starting frequency comes from a periodogram scan.
pub fn fit_damped_sinusoid(
    ts: &[f64],
    ys: &[f64],
    envelope: Envelope,
) -> Result<DampedSinusoidFit> {
    let n = ts.len();
    if n < 8 || ys.len() != n {
        return Err(Error::InvalidData(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    let t_span = ts[n - 1] - ts[0];
    if t_span <= 0.0 {
        return Err(Error::InvalidData("time samples must increase".into()));
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let spread = ys.iter().map(|y| (y - mean).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(Error::InvalidData("flat trace has no oscillation".into()));
    }

    // Periodogram over frequencies up to the sampling limit.
    let dt_min = ts
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let w_max = std::f64::consts::PI / dt_min;
    let w_step = std::f64::consts::PI / (4.0 * t_span);
    let power = |w: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        for (t, y) in ts.iter().zip(ys) {
            let (sn, cs) = (w * t).sin_cos();
            c += (y - mean) * cs;
            s += (y - mean) * sn;
        }
        (c * c + s * s, c, s)
    };
    let mut best = (0.0, w_step, 0.0, 0.0);
    let mut w = w_step;
    while w < w_max {
        let (p, c, s) = power(w);
        if p > best.0 {
            best = (p, w, c, s);
        }
        w += w_step;
    }
    let (_, w0, c0, s0) = best;
    let phase0 = (-s0).atan2(c0);

    let t0 = ts[0];
    let scaled: Vec<f64> = ts.iter().map(|t| (t - t0) / t_span).collect();
    // Unknowns: offset, amplitude, 1/τ (scaled), ω (scaled), φ.
    let model = |p: &[f64], u: f64, grad: &mut [f64]| {
        let (off, amp, rate, om, ph) = (p[0], p[1], p[2], p[3], p[4]);
        let (env, denv_drate) = match envelope {
            Envelope::Gaussian => {
                let e = (-(u * rate).powi(2)).exp();
                (e, -2.0 * u * u * rate * e)
            }
            Envelope::Exponential => {
                let e = (-u * rate).exp();
                (e, -u * e)
            }
        };
        let (sn, cs) = (om * u + ph).sin_cos();
        grad[0] = 1.0;
        grad[1] = env * cs;
        grad[2] = amp * denv_drate * cs;
        grad[3] = -amp * env * sn * u;
        grad[4] = -amp * env * sn;
        off + amp * env * cs
    };
    let mut first_err = None;
    for rate0 in [1.0, 0.3, 3.0] {
        let initial = [mean, spread, rate0, w0 * t_span, phase0 + w0 * t0];
        match levenberg_marquardt(model, &scaled, ys, None, &initial, &LmOptions::default()) {
            Ok(sol) => {
                let p = &sol.params;
                let (amp, phase) = if p[1] < 0.0 {
                    (-p[1], p[4] + std::f64::consts::PI)
                } else {
                    (p[1], p[4])
                };
                let omega = p[3] / t_span;
                // φ is referred back to t = 0
                return Ok(DampedSinusoidFit {
                    envelope,
                    offset: p[0],
                    amplitude: amp,
                    decay_time: t_span / p[2].abs(),
                    angular_frequency: omega,
                    phase: phase - omega * t0,
                    residual_norm: sol.rss.sqrt(),
                });
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap())
}
