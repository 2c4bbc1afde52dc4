//! Brute-force reference for the two-mode squeeze operator: the generator
//! `r(â_x â_y − â_x† â_y†)` is exponentiated numerically as a dense matrix.
//!
//! The generator conserves `n_x − n_y`, so it is block-diagonal over those
//! sectors. Each sector is a chain `|d+k, k⟩` that is exponentiated on a
//! padded basis: cutting the chain at the retained size leaks amplitude at the
//! boundary and ruins even low-index elements once `r ≳ 0.5`. Padding starts
//! where `tanh^k r` drops below 1e-10 (the leak has to travel out and back)
//! and grows until the retained block stops changing beyond rounding.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest per-mode dimension accepted.
pub const MAX_ORACLE_DIM: usize = 40;

const MAX_CHAIN: usize = 4096;
const PADDING_TOL: f64 = 1e-14;
const MIN_PADDING: usize = 32;

/// Dense `dim² × dim²` squeeze matrix over `|n_x, n_y⟩` with row/column index
/// `n_x·dim + n_y`.
#[derive(Debug, Clone)]
pub struct S2Oracle {
    dim: usize,
    matrix: DMatrix<f64>,
}

impl S2Oracle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn amplitude(&self, n_x: usize, n_y: usize, l_x: usize, l_y: usize) -> f64 {
        self.matrix[(n_x * self.dim + n_y, l_x * self.dim + l_y)]
    }

    pub fn element_sq(&self, n_x: usize, n_y: usize, l_x: usize, l_y: usize) -> f64 {
        self.amplitude(n_x, n_y, l_x, l_y).powi(2)
    }

    /// Euclidean norms of the columns.
    pub fn column_norms(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.norm()).collect()
    }
}

/// Squeeze operator on the `dim`-per-mode Fock basis with adaptive padding.
pub fn s2_oracle(r: f64, dim: usize) -> Result<S2Oracle> {
    check(r, dim)?;
    build(r, dim, None)
}

/// Same as [`s2_oracle`] but with a fixed number of padding levels per
/// sector; `0` reproduces the naive truncation.
pub fn s2_oracle_with_padding(r: f64, dim: usize, padding: usize) -> Result<S2Oracle> {
    check(r, dim)?;
    build(r, dim, Some(padding))
}

fn check(r: f64, dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_ORACLE_DIM {
        return Err(Error::ResourceLimit(format!(
            "oracle dimension {dim} per mode outside 1..={MAX_ORACLE_DIM}"
        )));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squeezing amplitude must be >= 0, got {r}"
        )));
    }
    Ok(())
}

/// Chain state `k` of sector `d`: `(n_x, n_y)`.
fn chain_state(d: i64, k: usize) -> (usize, usize) {
    if d >= 0 {
        (d as usize + k, k)
    } else {
        (k, (-d) as usize + k)
    }
}

fn chain_generator(r: f64, d: i64, len: usize) -> DMatrix<f64> {
    let mut gen = DMatrix::zeros(len, len);
    for k in 1..len {
        let (nx, ny) = chain_state(d, k);
        // ⟨k−1| a_x a_y |k⟩ = √(n_x n_y)
        let v = r * ((nx * ny) as f64).sqrt();
        gen[(k - 1, k)] = v;
        gen[(k, k - 1)] = -v;
    }
    gen
}

/// Leading `kept × kept` block of `exp(G)` for a chain of length `len`.
fn sector_propagator(r: f64, d: i64, len: usize, kept: usize) -> DMatrix<f64> {
    chain_generator(r, d, len)
        .exp()
        .view((0, 0), (kept, kept))
        .into_owned()
}

/// Padding after which `tanh^k r` is negligible.
fn initial_padding(r: f64, dim: usize) -> usize {
    let t = r.tanh();
    let estimate = if t > 0.0 {
        (-23.0 / t.ln()).ceil() as usize
    } else {
        0
    };
    estimate.max(dim).max(MIN_PADDING)
}

fn build(r: f64, dim: usize, padding: Option<usize>) -> Result<S2Oracle> {
    let size = dim * dim;
    let mut matrix = DMatrix::zeros(size, size);
    let span = dim as i64 - 1;
    for d in -span..=span {
        let kept = dim - d.unsigned_abs() as usize;
        let block = match padding {
            Some(p) => sector_propagator(r, d, kept + p, kept),
            None => {
                let mut pad = initial_padding(r, dim);
                let mut prev = sector_propagator(r, d, kept + pad, kept);
                loop {
                    pad += pad / 2;
                    if kept + pad > MAX_CHAIN {
                        return Err(Error::ResourceLimit(format!(
                            "oracle padding did not converge below {MAX_CHAIN} levels at r = {r}"
                        )));
                    }
                    let next = sector_propagator(r, d, kept + pad, kept);
                    let change = (&next - &prev).amax();
                    prev = next;
                    let rounding = 64.0 * f64::EPSILON * r * (kept + pad) as f64;
                    if change < PADDING_TOL.max(rounding) {
                        break prev;
                    }
                }
            }
        };
        for a in 0..kept {
            let (ax, ay) = chain_state(d, a);
            for b in 0..kept {
                let (bx, by) = chain_state(d, b);
                matrix[(ax * dim + ay, bx * dim + by)] = block[(a, b)];
            }
        }
    }
    Ok(S2Oracle { dim, matrix })
}
