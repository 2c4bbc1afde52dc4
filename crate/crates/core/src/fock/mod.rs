//! Truncated Fock-basis engine: phonon-number distributions of squeezed
//! states, thermal weighting of the two-mode squeeze operator, and phonon
//! statistics.
//!
//! Only probabilities are stored; coherences (and hence the squeeze phase)
//! never enter the sideband observables.

mod combinatorics;
mod elements;
mod oracle;
mod thermal;

pub use combinatorics::{ln_binomial, ln_factorial};
pub use elements::{s1_amplitude, s2_amplitude, s2_matrix_element_sq};
pub use oracle::{s2_oracle, s2_oracle_with_padding, S2Oracle, MAX_ORACLE_DIM};
pub use thermal::{thermal_weighted_distribution, TwoModeSqueezeOp, DEFAULT_L_CAP};

use std::io::{self, BufRead, Write};

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;

/// Default per-mode phonon cap for sideband sums.
pub const DEFAULT_N_MAX: usize = 25;

/// Default acceptance gate on the probability lost to truncation.
pub const DEFAULT_TRUNCATION_GATE: f64 = 1e-3;

/// Which mode of a two-mode table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockAxis {
    X,
    Y,
}

/// Phonon-number distribution of a single mode, `probs[n] = P(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDistribution {
    probs: Vec<f64>,
}

impl PhononDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("distribution needs at least one entry"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and nonnegative"));
        }
        if probs.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(invalid("probabilities sum above one"));
        }
        Ok(Self { probs })
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn truncation_mass(&self) -> f64 {
        (1.0 - self.probs.iter().sum::<f64>()).max(0.0)
    }

    /// Mean and variance of the phonon number.
    pub fn stats(&self) -> (f64, f64) {
        moments(self.probs.iter().copied().enumerate())
    }
}

fn moments(weighted: impl Iterator<Item = (usize, f64)>) -> (f64, f64) {
    let (mut norm, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (n, p) in weighted {
        let n = n as f64;
        norm += p;
        m1 += p * n;
        m2 += p * n * n;
    }
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let mean = m1 / norm;
    (mean, (m2 / norm - mean * mean).max(0.0))
}

/// Truncated two-mode table `P(n_x′, n_y′)` with `0 ≤ n ≤ n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    n_max: usize,
    probs: Vec<f64>,
    /// Set when an internal sum was cut short enough to matter.
    pub warning: Option<String>,
}

impl FockDistribution {
    /// Row-major table, rows indexed by `n_x′`.
    pub fn from_table(n_max: usize, probs: Vec<f64>) -> Result<Self> {
        let side = n_max + 1;
        if probs.len() != side * side {
            return Err(invalid(format!(
                "table of {} entries does not match n_max = {n_max}",
                probs.len()
            )));
        }
        PhononDistribution::from_probs(probs.clone())?;
        Ok(Self {
            n_max,
            probs,
            warning: None,
        })
    }

    /// Independent modes: `P(n_x, n_y) = P_x(n_x)·P_y(n_y)`, cut to the
    /// shorter of the two.
    pub fn product(px: &PhononDistribution, py: &PhononDistribution) -> Self {
        let n_max = px.n_max().min(py.n_max());
        let side = n_max + 1;
        let mut probs = Vec::with_capacity(side * side);
        for nx in 0..side {
            for ny in 0..side {
                probs.push(px.probs[nx] * py.probs[ny]);
            }
        }
        Self {
            n_max,
            probs,
            warning: None,
        }
    }

    /// A single mode along `x′`, with `y′` in its ground state.
    pub fn from_x_marginal(px: &PhononDistribution) -> Self {
        let side = px.n_max() + 1;
        let mut probs = vec![0.0; side * side];
        for (nx, p) in px.probs.iter().enumerate() {
            probs[nx * side] = *p;
        }
        Self {
            n_max: px.n_max(),
            probs,
            warning: None,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n_x: usize, n_y: usize) -> f64 {
        self.probs[n_x * (self.n_max + 1) + n_y]
    }

    pub fn table(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let side = self.n_max + 1;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (i / side, i % side, *p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn truncation_mass(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    pub fn check_gate(&self, gate: f64) -> Result<()> {
        let mass = self.truncation_mass();
        if mass >= gate {
            return Err(Error::Truncation { mass, gate });
        }
        Ok(())
    }

    pub fn marginal(&self, axis: FockAxis) -> PhononDistribution {
        let side = self.n_max + 1;
        let mut probs = vec![0.0; side];
        for (nx, ny, p) in self.iter() {
            probs[match axis {
                FockAxis::X => nx,
                FockAxis::Y => ny,
            }] += p;
        }
        PhononDistribution { probs }
    }

    /// Writes the table as CSV: a header row of `n_y′` indices, then one row
    /// per `n_x′` led by its index.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let side = self.n_max + 1;
        write!(out, "nx\\ny")?;
        for ny in 0..side {
            write!(out, ",{ny}")?;
        }
        writeln!(out)?;
        for nx in 0..side {
            write!(out, "{nx}")?;
            for ny in 0..side {
                write!(out, ",{:e}", self.get(nx, ny))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Parses the layout written by [`FockDistribution::write_csv`]; lines
    /// starting with `#` are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut header_seen = false;
        for line in input.lines() {
            let line = line.map_err(|e| Error::InvalidData(e.to_string()))?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let vals = line
                .split(',')
                .skip(1)
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidData(format!("bad table entry: {e}")))?;
            rows.push(vals);
        }
        let side = rows.len();
        if side == 0 || rows.iter().any(|r| r.len() != side) {
            return Err(Error::InvalidData("table is not square".into()));
        }
        Self::from_table(side - 1, rows.concat())
    }
}

/// Mean and variance of the phonon number along one axis.
pub fn phonon_stats(dist: &FockDistribution, axis: FockAxis) -> (f64, f64) {
    dist.marginal(axis).stats()
}

/// Two-mode squeezed vacuum, `P(n, n) = sech² r · tanh^{2n} r`.
pub fn tmsv_probabilities(r: f64, n_max: usize) -> Result<FockDistribution> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(format!(
            "squeezing amplitude must be >= 0, got {r}"
        )));
    }
    let side = n_max + 1;
    let mut probs = vec![0.0; side * side];
    let (sech2, t2) = (1.0 / r.cosh().powi(2), r.tanh().powi(2));
    let mut p = sech2;
    for n in 0..side {
        probs[n * side + n] = p;
        p *= t2;
    }
    Ok(FockDistribution {
        n_max,
        probs,
        warning: None,
    })
}

/// Squeezed vacuum, `P(2m) = (2m)! / (2^m m!)² · tanh^{2m} r / cosh r`.
pub fn smsv_probabilities(r: f64, n_max: usize) -> Result<PhononDistribution> {
    squeezed_thermal_distribution(r, 0.0, n_max)
}

/// Squeezed thermal state `Ŝ(r) ρ_th(n̄) Ŝ†(r)`:
/// `P(n) = Σ_l p_th(l) |⟨n|Ŝ(r)|l⟩|²`.
pub fn squeezed_thermal_distribution(
    r: f64,
    nbar: f64,
    n_max: usize,
) -> Result<PhononDistribution> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(format!(
            "squeezing amplitude must be >= 0, got {r}"
        )));
    }
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(invalid(format!("mean occupation must be >= 0, got {nbar}")));
    }
    let weights = boltzmann_weights(nbar, 1e-16);
    let probs = (0..=n_max)
        .map(|n| {
            weights
                .iter()
                .enumerate()
                .map(|(l, w)| w * s1_amplitude(n, l, r).powi(2))
                .sum()
        })
        .collect();
    Ok(PhononDistribution { probs })
}

/// Phonon distribution of a zero-mean single-mode Gaussian state, which is
/// always a rotated squeezed thermal state.
pub fn gaussian_phonon_distribution(
    state: &GaussianState,
    n_max: usize,
) -> Result<PhononDistribution> {
    if state.mode_count() != 1 {
        return Err(invalid("phonon distribution needs a single-mode state"));
    }
    if state.mean().amax() > 1e-12 {
        return Err(invalid("displaced states are not supported"));
    }
    let (nbar, r) = squeezed_thermal_parameters(state);
    squeezed_thermal_distribution(r, nbar, n_max)
}

/// Phonon probabilities of a zero-mean single-mode Gaussian state, extended
/// until the remaining mass falls below `tol` or `n_limit` is reached.
///
/// With `σ = 2V` (vacuum `½·I`) the generating function is
/// `Σ P(n) zⁿ = Q(z)^{−1/2}`, `Q(z) = det(σ + ½ − z(σ − ½))`, a quadratic,
/// so the coefficients obey a three-term recurrence.
pub fn gaussian_phonon_probs(state: &GaussianState, tol: f64, n_limit: usize) -> Result<Vec<f64>> {
    if state.mode_count() != 1 {
        return Err(invalid("phonon distribution needs a single-mode state"));
    }
    if state.mean().amax() > 1e-12 {
        return Err(invalid("displaced states are not supported"));
    }
    let sigma = state.mode_block(0) * 2.0;
    let (det, tr) = (sigma.determinant(), sigma.trace());
    let q0 = det + 0.5 * tr + 0.25;
    let q1 = 0.5 - 2.0 * det;
    let q2 = det - 0.5 * tr + 0.25;
    let mut probs = vec![q0.powf(-0.5)];
    let mut remaining = 1.0 - probs[0];
    let (mut prev, mut cur) = (0.0, probs[0]);
    let mut n = 0usize;
    while remaining > tol && n < n_limit {
        let nf = n as f64;
        let next = (-(q1 * (nf + 0.5) * cur + q2 * nf * prev) / (q0 * (nf + 1.0))).max(0.0);
        probs.push(next);
        remaining -= next;
        prev = cur;
        cur = next;
        n += 1;
    }
    if remaining > tol {
        return Err(Error::ResourceLimit(format!(
            "phonon cutoff {n_limit} leaves mass {remaining:.3e}"
        )));
    }
    Ok(probs)
}

/// `(n̄, r)` of the squeezed thermal form of a single-mode covariance.
pub fn squeezed_thermal_parameters(state: &GaussianState) -> (f64, f64) {
    let b = state.mode_block(0);
    let nu = b.determinant().max(0.0).sqrt();
    let nbar = (2.0 * nu - 0.5).max(0.0);
    // tr V = 2ν cosh 2r
    let r = 0.5 * (b.trace() / (2.0 * nu)).max(1.0).acosh();
    (nbar, r)
}

/// Thermal occupation probabilities `(1−q) qˡ`, cut where the remaining tail
/// falls below `tail`.
pub(crate) fn boltzmann_weights(nbar: f64, tail: f64) -> Vec<f64> {
    if nbar == 0.0 {
        return vec![1.0];
    }
    let q = nbar / (1.0 + nbar);
    let mut w = Vec::new();
    let mut p = 1.0 - q;
    let mut remaining: f64 = 1.0;
    while remaining > tail && w.len() < 10_000 {
        w.push(p);
        remaining -= p;
        p *= q;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmsv_closed_form() {
        let d = tmsv_probabilities(0.0, 5).unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.total(), 1.0);
        let d = tmsv_probabilities(1.0, 50).unwrap();
        assert!((d.get(0, 0) - 0.4200).abs() < 5e-5);
        assert!((d.get(1, 1) - 0.2436).abs() < 5e-5);
        assert_eq!(d.get(1, 0), 0.0);
        assert!(d.truncation_mass() < 1e-11);
        let expected_tail = 1f64.tanh().powi(102);
        assert!((d.truncation_mass() - expected_tail).abs() < 1e-15);
    }

    #[test]
    fn smsv_parity_and_mean() {
        let p = smsv_probabilities(0.0, 4).unwrap();
        assert_eq!(p.probs()[0], 1.0);
        let r: f64 = 1.0;
        let p = smsv_probabilities(r, 400).unwrap();
        assert!(p.probs().iter().skip(1).step_by(2).all(|&v| v == 0.0));
        let (mean, var) = p.stats();
        let s2 = r.sinh().powi(2);
        assert!((mean - s2).abs() < 1e-10, "{mean}");
        assert!((var - 2.0 * s2 * r.cosh().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn tmsv_stats() {
        let r: f64 = 1.0;
        let d = tmsv_probabilities(r, 200).unwrap();
        let (mean, var) = phonon_stats(&d, FockAxis::X);
        assert!((mean - r.sinh().powi(2)).abs() < 1e-12);
        assert!((mean - 1.3811).abs() < 5e-5);
        assert!((var - r.sinh().powi(2) * r.cosh().powi(2)).abs() < 1e-10);
        // quoted rounded value 3.2908 is off in the third decimal
        assert!((var - 3.2908).abs() < 3e-3);
        let v = tmsv_probabilities(0.0, 3).unwrap();
        assert_eq!(phonon_stats(&v, FockAxis::Y), (0.0, 0.0));
    }

    #[test]
    fn gaussian_state_conversion() {
        let state = GaussianState::thermal(1, 0.3)
            .unwrap()
            .apply_squeeze(0, crate::gaussian::SqueezeParams::new(0.7, 0.4).unwrap())
            .unwrap();
        let (nbar, r) = squeezed_thermal_parameters(&state);
        assert!((nbar - 0.3).abs() < 1e-12);
        assert!((r - 0.7).abs() < 1e-12);
        let p = gaussian_phonon_distribution(&state, 200).unwrap();
        let (mean, _) = p.stats();
        // ⟨n⟩ = (tr V − 1/2) in this convention, i.e. (⟨x̄²⟩+⟨p̄²⟩) − 1/2
        let expected = state.cov().trace() - 0.5;
        assert!((mean - expected).abs() < 1e-10);
    }

    #[test]
    fn csv_round_trip() {
        let d = tmsv_probabilities(0.6, 6).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = FockDistribution::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.table(), d.table());
        assert!(String::from_utf8(buf).unwrap().starts_with("nx\\ny,0,1,2"));
    }

    #[test]
    fn gate() {
        let d = tmsv_probabilities(1.5, 10).unwrap();
        assert!(matches!(d.check_gate(1e-3), Err(Error::Truncation { .. })));
        assert!(tmsv_probabilities(0.5, 40)
            .unwrap()
            .check_gate(1e-3)
            .is_ok());
    }

    #[test]
    fn recurrence_matches_amplitude_sums() {
        for (r, nbar, phi) in [
            (0.0, 0.0, 0.0),
            (0.4, 0.0, 0.3),
            (1.2, 0.06, 1.1),
            (0.9, 0.7, 2.5),
            (0.0, 1.3, 0.0),
        ] {
            let state = GaussianState::thermal(1, nbar)
                .unwrap()
                .apply_squeeze(0, crate::gaussian::SqueezeParams::new(r, 0.0).unwrap())
                .unwrap()
                .apply_rotation(0, phi)
                .unwrap();
            let fast = gaussian_phonon_probs(&state, 1e-13, 100_000).unwrap();
            let slow = squeezed_thermal_distribution(r, nbar, fast.len() - 1).unwrap();
            for (n, (a, b)) in fast.iter().zip(slow.probs()).enumerate() {
                assert!((a - b).abs() < 1e-12, "r {r} nbar {nbar} n {n}: {a} vs {b}");
            }
            assert!(1.0 - fast.iter().sum::<f64>() <= 1e-13);
        }
    }

    #[test]
    fn recurrence_reports_exhausted_cutoff() {
        let state = GaussianState::thermal(1, 50.0).unwrap();
        assert!(matches!(
            gaussian_phonon_probs(&state, 1e-12, 10),
            Err(Error::ResourceLimit(_))
        ));
    }
}
