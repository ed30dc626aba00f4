//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Physical parameters rejected at construction (non-finite, negative
    /// field magnitude, and similar).
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// A state vector violating normalization or finiteness.
    #[error("invalid state vector: {0}")]
    InvalidState(String),

    /// The iterative symmetric eigensolver exhausted its sweep budget.
    /// Practically unreachable for finite symmetric 3x3 input; kept as a
    /// guard against NaN poisoning.
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    EigenConvergence { sweeps: usize, off: f64 },

    /// Resource guard for time grids: the requested sample count exceeds
    /// the configured cap.
    #[error("time grid too fine: {samples} samples exceed the cap of {cap}")]
    GridTooFine { samples: usize, cap: usize },

    /// The gap-coincidence indicator does not change sign on the bracket,
    /// so bisection cannot start.
    #[error(
        "no sign change of the gap-coincidence indicator on [{lo}, {hi}] \
         (g(lo) = {g_lo:e}, g(hi) = {g_hi:e})"
    )]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// The cosine-line spectrum is only defined when the system starts in
    /// the middle basis state |0> (up to a global phase).
    #[error(
        "analytic line spectrum requires the initial state |0> up to a global phase; \
         got populations {populations:?}"
    )]
    UnsupportedInitial { populations: [f64; 3] },

    /// A spectral decomposition whose probabilities or states violate the
    /// documented tolerances.
    #[error("invalid spectral decomposition: {0}")]
    InvalidDecomposition(String),

    /// Cramer-Rao bound requested for zero Fisher information.
    #[error("estimate unbounded: Fisher information is zero")]
    UnboundedEstimate,

    /// Quadratic fit attempted with fewer than three distinct abscissae.
    #[error("quadratic fit needs at least 3 distinct abscissae, got {distinct}")]
    RankDeficient { distinct: usize },

    /// Periodogram input sampled on a non-uniform time grid.
    #[error("periodogram requires a uniform time grid (max spacing deviation {max_dev:e} ns)")]
    NonUniformGrid { max_dev: f64 },

    /// Periodogram input with too few samples to resolve anything.
    #[error("periodogram requires at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    /// Internal consistency violation (e.g. an information value more
    /// negative than the rounding tolerance allows).
    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),

    /// Config-file syntax or type error, with its 1-based line number.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Semantically invalid configuration after merging file and flags.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Filesystem failure while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
