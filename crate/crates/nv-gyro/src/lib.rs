//! Exact dynamics and rotation-rate metrology for a spin-1 system driven
//! by a rotating transverse magnetic field in a mechanically rotating
//! frame.
//!
//! The co-rotating generator is a real symmetric 3x3 matrix, so evolution,
//! population beat spectra, and the quantum Fisher information (QFI) of
//! the rotation-rate estimate all follow exactly from one symmetric
//! eigendecomposition; a fixed-step Runge-Kutta integrator is kept as an
//! independent cross-check.
//!
//! # Units
//!
//! Times are nanoseconds. Every quantity quoted as a frequency (the
//! zero-field splitting `d`, the drive coupling `a`, the rotation rates
//! and their detuning `delta`, eigenvalues, and spectral line positions)
//! is a *stored frequency* `nu`: dynamical phases always enter as
//! `2 pi * nu * t`. With the conventional constants (`g_e = 2`,
//! `mu_b = 14` per mT) a field of about 505.08 mT realizes a coupling of
//! `a = 10` in these units.
//!
//! # Layout
//!
//! - [`model`]: parameters, spin operators, states, frames, generator.
//! - [`evolution`]: eigendecomposition, exact propagation, RK4 oracle.
//! - [`spectrum`]: beat-line content, periodogram, crossing, regimes.
//! - [`metrology`]: propagator derivative, pure/mixed QFI, Cramer-Rao.
//! - [`analysis`]: quadratic fits and the coupling-scaling study.
//! - [`config`] and [`cli`]: run configuration and the `nvgyro` binary.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod metrology;
pub mod model;
pub mod spectrum;

pub use analysis::{fit_quadratic, scaling_study, FitResult, ScalingRow};
pub use config::{load_config, parse_config_text, OutputFormat, RunConfig};
pub use error::{Error, Result};
pub use evolution::{
    eigendecompose, population_series, propagate, propagate_lab, rk4_oracle, EigenSystem,
    Trajectory,
};
pub use metrology::{
    cramer_rao_bound, propagator_derivative, qfi_delta_sweep, qfi_mixed, qfi_pure,
    qfi_time_series, QfiPoint, QfiSeries, SpectralDecomposition,
};
pub use model::{
    frame_phase_map, generator_m, hamiltonian_lab, Frame, GeneratorM, ModelParams, SpinOps,
    StateVector,
};
pub use spectrum::{
    analytic_spectrum, classify_beat, find_frequency_crossing, periodogram, sweep_spectrum,
    BeatClass, BeatReport, Periodogram, SpectralLine, Spectrum, Taper,
};
