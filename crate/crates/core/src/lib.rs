//! Deterministic simulation and analysis of two-mode squeezed states of
//! mechanical oscillators.
//!
//! * [`gaussian`]: covariance-matrix engine, closed-form widths, entanglement
//!   criteria and Wigner functions.
//! * [`fock`]: truncated Fock-basis distributions and the dense
//!   matrix-exponential reference.
//! * [`protocol`]: frequency-jump squeezing, the two-mode timing sequence and
//!   the echo experiment.
//! * [`spectroscopy`]: sideband populations, red/blue ratios, Raman
//!   velocimetry and Gaussian fitting.

pub mod error;
pub mod fit;
pub mod fock;
pub mod gaussian;
pub mod protocol;
pub mod quadrature;
pub mod spectroscopy;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use fock::{FockAxis, FockDistribution, PhononDistribution, TwoModeSqueezeOp};
pub use gaussian::{GaussianState, SqueezeParams};
pub use protocol::{InhomogeneityModel, JumpSchedule, TwoModeEvolution};
pub use spectroscopy::{ScanAxis, SidebandModel, VelocityScan};
pub use trace::Trace;
pub use units::OscillatorConfig;
