//! Numerical scattering theory for `H = Δ² + V` on the plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Bessel/Hankel functions and the free resolvent kernels.
//! * [`fourier`]: grids, FFT multipliers, cutoffs, spherical means.
//! * [`operators`]: potentials, Birman-Schwinger matrices, spectral projections,
//!   the radial operators `K̃₁`, `K̃₂`.
//! * [`threshold`]: projections, low-energy expansion, Jensen-Nenciu and
//!   Feshbach inversion, zero-energy classification.
//! * [`waveop`]: stationary wave operator and Born series.
//! * [`harness`]: kernel `L(x, y)`, appendix inequalities, `L^p` scans.

pub mod error;
pub mod fourier;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod quad;
pub mod specfun;
pub mod threshold;
pub mod waveop;

pub use error::{Error, Result};

pub use num_complex::Complex64;

pub use fourier::{Field, Multiplier, PlaneGrid, TestFunction};
pub use harness::{Check, KernelLEvaluator, LpScanReport};
pub use operators::{DiscreteOperator, PotentialData, PotentialSpec};
pub use specfun::{ComplexKernel, KernelKind, SpectralPoint};
pub use threshold::{ClassificationReport, ProjectionSet, ThresholdExpansion, Verdict};
pub use waveop::{WaveMetrics, WaveMode, WaveOperatorConfig};

/// Japanese bracket `⟨t⟩ = (1 + t²)^{1/2}`.
#[inline]
pub fn jbracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Log-log slope of `y` against `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}
