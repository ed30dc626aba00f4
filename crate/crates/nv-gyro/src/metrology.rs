//! Quantum Fisher information (QFI) for estimating the rotation detuning,
//! via the exact parameter derivative of the eigendecomposed propagator,
//! plus the mixed-state extension and the quantum Cramer-Rao bound.

use crate::error::{Error, Result};
use crate::evolution::{eigendecompose, propagate, EigenSystem};
use crate::linalg::{
    c_zeros, cdot, cis, cmat_mul, cmat_vec, rmat_to_cmat, rmat_transpose, C64, CMat3, CVec3, TAU,
};
use crate::model::{frame_phase_map, generator_m, Frame, ModelParams, StateVector};

/// Eigenvalue gaps below this use the degenerate limit of the divided
/// difference in the propagator derivative; above it the quotient form is
/// well conditioned.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Round-off can push an exactly-zero QFI slightly negative; values in
/// `[-QFI_NEG_TOL, 0)` clamp to zero, anything more negative is an internal
/// inconsistency.
pub const QFI_NEG_TOL: f64 = 1e-10;

/// Probabilities at or below this weight are treated as absent in the
/// mixed-state QFI sums.
pub const PROB_FLOOR: f64 = 1e-14;

/// QFI evaluated at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiPoint {
    /// Evolution time.
    pub t: f64,
    /// Detuning at which the derivative is taken.
    pub delta: f64,
    /// Drive coupling of the model.
    pub a_coupling: f64,
    /// Frame the state was expressed in.
    pub frame: Frame,
    /// Quantum Fisher information (nonnegative).
    pub value: f64,
}

/// An ordered collection of QFI evaluations (over time or over detuning).
#[derive(Debug, Clone, PartialEq)]
pub struct QfiSeries {
    /// Evaluations in grid order.
    pub points: Vec<QfiPoint>,
}

impl QfiSeries {
    /// The point with the largest QFI value, if the series is nonempty.
    pub fn max_point(&self) -> Option<&QfiPoint> {
        self.points.iter().max_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .expect("finite QFI values")
        })
    }
}

/// Detuning derivative of the co-rotating propagator `U(t)`, from the
/// eigendecomposition: with `N = dM/d(delta) = diag(1, 0, -1)` folded into
/// the eigenbasis, each entry is the divided difference of
/// `exp(-i TAU lambda t)` across the eigenvalue pair, with the confluent
/// limit `-i TAU t exp(-i TAU lambda t)` on (nearly) degenerate pairs.
pub fn propagator_derivative(eig: &EigenSystem, t: f64) -> CMat3 {
    let v = &eig.vectors;
    let mut core = c_zeros();
    for j in 0..3 {
        for k in 0..3 {
            // (V^T N V)_{jk} with N = diag(1, 0, -1).
            let ntilde = v[0][j] * v[0][k] - v[2][j] * v[2][k];
            let lj = eig.lambdas[j];
            let lk = eig.lambdas[k];
            let f = if (lj - lk).abs() <= DEGENERACY_TOL {
                let mid = 0.5 * (lj + lk);
                C64::new(0.0, -TAU * t) * cis(-TAU * mid * t)
            } else {
                (cis(-TAU * lj * t) - cis(-TAU * lk * t)) / (lj - lk)
            };
            core[j][k] = ntilde * f;
        }
    }
    let vc = rmat_to_cmat(v);
    let vt = rmat_to_cmat(&rmat_transpose(v));
    cmat_mul(&vc, &cmat_mul(&core, &vt))
}

/// QFI of a normalized pure state and its parameter derivative:
/// `4 (<dpsi|dpsi> - |<psi|dpsi>|^2)`. May return a tiny negative number
/// from round-off; [`qfi_pure`] applies the clamp policy.
pub fn qfi_from_pair(psi: &CVec3, dpsi: &CVec3) -> f64 {
    let grad_sq = cdot(dpsi, dpsi).re;
    let overlap = cdot(psi, dpsi);
    4.0 * (grad_sq - overlap.norm_sqr())
}

/// State and its detuning derivative at time `t` in the requested frame,
/// starting from `initial` (given at t = 0, where the frames coincide).
fn state_and_derivative(
    params: &ModelParams,
    eig: &EigenSystem,
    initial: &StateVector,
    t: f64,
    frame: Frame,
) -> (CVec3, CVec3) {
    let y = propagate(eig, initial, t);
    let du = propagator_derivative(eig, t);
    let dy = cmat_vec(&du, &initial.amps);
    match frame {
        Frame::Rotating => (y.amps, dy),
        Frame::Lab => {
            // psi = Phi Y and dPhi = i TAU t N Phi, so by the product rule
            // dpsi = Phi (i TAU t N Y + dY) with N = diag(1, 0, -1).
            let phi = frame_phase_map(params, t);
            let mut inner = dy;
            for (i, n) in [1.0, 0.0, -1.0].into_iter().enumerate() {
                inner[i] += C64::new(0.0, TAU * t * n) * y.amps[i];
            }
            (cmat_vec(&phi, &y.amps), cmat_vec(&phi, &inner))
        }
    }
}

fn clamp_qfi(raw: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -QFI_NEG_TOL {
        Ok(0.0)
    } else {
        Err(Error::Inconsistency(format!(
            "pure-state QFI came out {raw:e}, below the -1e-10 round-off allowance"
        )))
    }
}

/// QFI of the pure state evolved from `initial` for time `t`, with respect
/// to the detuning, in the requested frame. The initial state must be given
/// at t = 0 and is held parameter-independent.
pub fn qfi_pure(
    params: &ModelParams,
    initial: &StateVector,
    t: f64,
    frame: Frame,
) -> Result<QfiPoint> {
    if !t.is_finite() {
        return Err(Error::InvalidParams(format!("non-finite time {t}")));
    }
    if initial.time != 0.0 {
        return Err(Error::InvalidState(format!(
            "QFI evolution starts from t = 0, initial state is at t = {}",
            initial.time
        )));
    }
    let eig = eigendecompose(&generator_m(params), initial)?;
    let (psi, dpsi) = state_and_derivative(params, &eig, initial, t, frame);
    Ok(QfiPoint {
        t,
        delta: params.delta(),
        a_coupling: params.a_coupling(),
        frame,
        value: clamp_qfi(qfi_from_pair(&psi, &dpsi))?,
    })
}

/// QFI along a time grid, in the requested frame. The generator is
/// diagonalized once and reused for every grid point.
pub fn qfi_time_series(
    params: &ModelParams,
    initial: &StateVector,
    times: &[f64],
    frame: Frame,
) -> Result<QfiSeries> {
    if initial.time != 0.0 {
        return Err(Error::InvalidState(format!(
            "QFI evolution starts from t = 0, initial state is at t = {}",
            initial.time
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams("non-finite time in grid".into()));
    }
    let eig = eigendecompose(&generator_m(params), initial)?;
    let delta = params.delta();
    let a = params.a_coupling();
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let (psi, dpsi) = state_and_derivative(params, &eig, initial, t, frame);
        points.push(QfiPoint {
            t,
            delta,
            a_coupling: a,
            frame,
            value: clamp_qfi(qfi_from_pair(&psi, &dpsi))?,
        });
    }
    Ok(QfiSeries { points })
}

/// QFI at a fixed time across a detuning grid, in the requested frame.
pub fn qfi_delta_sweep(
    template: &ModelParams,
    initial: &StateVector,
    t_fixed: f64,
    delta_grid: &[f64],
    frame: Frame,
) -> Result<QfiSeries> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidParams("empty detuning grid".into()));
    }
    let mut points = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let params = template.with_delta(delta);
        points.push(qfi_pure(&params, initial, t_fixed, frame)?);
    }
    Ok(QfiSeries { points })
}

/// Spectral decomposition of a parametrized density matrix: eigenvalue
/// probabilities, orthonormal eigenstates, and their parameter derivatives.
///
/// The fields are public for direct construction in tests and callers;
/// [`SpectralDecomposition::new`] validates the invariants strictly, and
/// [`qfi_mixed`] re-checks normalization at a looser gate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Eigenvalue probabilities, nonnegative, summing to 1.
    pub probs: Vec<f64>,
    /// Orthonormal eigenstates matching `probs`.
    pub states: Vec<CVec3>,
    /// Parameter derivatives of `probs`, summing to 0.
    pub dprobs: Vec<f64>,
    /// Parameter derivatives of `states`.
    pub dstates: Vec<CVec3>,
}

impl SpectralDecomposition {
    /// Validated constructor: equal nonzero lengths, probabilities
    /// normalized within 1e-12 and nonnegative, derivative weights summing
    /// to zero within 1e-10, states orthonormal within 1e-12.
    pub fn new(
        probs: Vec<f64>,
        states: Vec<CVec3>,
        dprobs: Vec<f64>,
        dstates: Vec<CVec3>,
    ) -> Result<Self> {
        let n = probs.len();
        if n == 0 || states.len() != n || dprobs.len() != n || dstates.len() != n {
            return Err(Error::InvalidDecomposition(format!(
                "component counts disagree: {} probs, {} states, {} dprobs, {} dstates",
                probs.len(),
                states.len(),
                dprobs.len(),
                dstates.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDecomposition(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let psum: f64 = probs.iter().sum();
        if (psum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDecomposition(format!(
                "probabilities sum to {psum}, not 1"
            )));
        }
        let dsum: f64 = dprobs.iter().sum();
        if dsum.abs() > 1e-10 {
            return Err(Error::InvalidDecomposition(format!(
                "probability derivatives sum to {dsum:e}, not 0"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = cdot(&states[i], &states[j]);
                if (got - C64::new(want, 0.0)).norm() > 1e-12 {
                    return Err(Error::InvalidDecomposition(format!(
                        "states {i} and {j} are not orthonormal: <i|j> = {got}"
                    )));
                }
            }
        }
        Ok(Self {
            probs,
            states,
            dprobs,
            dstates,
        })
    }
}

/// Mixed-state QFI from a spectral decomposition:
///
/// `F = sum_i (dp_i)^2 / p_i + 4 sum_i p_i <ds_i|ds_i>
///      - sum_{i,j} 8 p_i p_j / (p_i + p_j) |<s_i|ds_j>|^2`
///
/// where the last sum runs over all ordered pairs including `i = j`, so a
/// rank-one decomposition reduces exactly to the pure-state formula.
/// Components with probability at or below [`PROB_FLOOR`] are skipped.
pub fn qfi_mixed(dec: &SpectralDecomposition) -> Result<f64> {
    let psum: f64 = dec.probs.iter().sum();
    if (psum - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDecomposition(format!(
            "probabilities sum to {psum}, not 1"
        )));
    }
    let n = dec.probs.len();
    if dec.states.len() != n || dec.dprobs.len() != n || dec.dstates.len() != n {
        return Err(Error::InvalidDecomposition(
            "component counts disagree".into(),
        ));
    }
    let mut f = 0.0;
    for i in 0..n {
        if dec.probs[i] > PROB_FLOOR {
            f += dec.dprobs[i] * dec.dprobs[i] / dec.probs[i];
            f += 4.0 * dec.probs[i] * cdot(&dec.dstates[i], &dec.dstates[i]).re;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (dec.probs[i], dec.probs[j]);
            if pi <= PROB_FLOOR || pj <= PROB_FLOOR {
                continue;
            }
            let coupling = 8.0 * pi * pj / (pi + pj);
            f -= coupling * cdot(&dec.states[i], &dec.dstates[j]).norm_sqr();
        }
    }
    clamp_qfi(f)
}

/// Quantum Cramer-Rao bound on the detuning estimate: `1 / sqrt(nu * F)`
/// for `nu` independent repetitions. Zero information means the parameter
/// is unidentifiable at this design point.
pub fn cramer_rao_bound(qfi: f64, repetitions: f64) -> Result<f64> {
    if !qfi.is_finite() || qfi < 0.0 {
        return Err(Error::InvalidParams(format!(
            "QFI must be finite and nonnegative, got {qfi}"
        )));
    }
    if !repetitions.is_finite() || repetitions <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "repetition count must be positive, got {repetitions}"
        )));
    }
    if qfi == 0.0 {
        return Err(Error::UnboundedEstimate);
    }
    Ok(1.0 / (repetitions * qfi).sqrt())
}
