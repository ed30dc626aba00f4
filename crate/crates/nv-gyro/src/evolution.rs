//! Exact time evolution under the constant co-rotating generator via its
//! real-symmetric eigendecomposition, lab-frame reconstruction through the
//! diagonal phase map, population time series, and an independent fixed-step
//! RK4 integrator used as a verification oracle.

use crate::error::{Error, Result};
use crate::linalg::{cis, cmat_vec, sym_eigen3, CVec3, RMat3, C64, TAU};
use crate::model::{frame_phase_map, generator_m, hamiltonian_lab, Frame, ModelParams, StateVector};

/// Default cap on the number of samples a time grid may request; a resource
/// guard, not a mathematical limit.
pub const DEFAULT_SAMPLE_CAP: usize = 10_000_000;

/// Hard ceiling on RK4 steps per call, guarding against absurd `dt`.
const RK4_STEP_CAP: usize = 100_000_000;

/// Eigenvalues, eigenvectors, and initial-state overlap weights of the
/// co-rotating-frame generator.
///
/// Eigenvalues are sorted ascending; eigenvector columns are sign-fixed
/// (largest-magnitude component positive) so the decomposition is
/// deterministic across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Eigenvalues, ascending.
    pub lambdas: [f64; 3],
    /// Orthonormal eigenvectors as columns: `vectors[row][k]` is component
    /// `row` of eigenvector `k`.
    pub vectors: RMat3,
    /// Overlap weights `c_k = |<v_k|initial>|^2`; they sum to 1.
    pub weights: [f64; 3],
    /// The initial state the weights refer to.
    pub initial: CVec3,
}

impl EigenSystem {
    /// Column `k` as a real 3-vector.
    pub fn vector(&self, k: usize) -> [f64; 3] {
        [self.vectors[0][k], self.vectors[1][k], self.vectors[2][k]]
    }

    /// Complex overlap `<v_k|initial>`.
    pub fn overlap(&self, k: usize) -> C64 {
        let v = self.vector(k);
        v[0] * self.initial[0] + v[1] * self.initial[1] + v[2] * self.initial[2]
    }
}

/// Sampled evolution: a uniform time grid, the states along it (co-rotating
/// frame), and the |0> populations.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times in ns.
    pub times: Vec<f64>,
    /// States at the sample times.
    pub states: Vec<StateVector>,
    /// `P(t) = |b(t)|^2`, clamped into [0, 1] against rounding.
    pub populations: Vec<f64>,
}

impl Trajectory {
    /// Grid spacing in ns (the grid is uniform by construction).
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// Diagonalize an arbitrary real-symmetric 3x3 matrix and attach overlap
/// weights for `initial`. This is the workhorse behind [`eigendecompose`];
/// it also serves shifted matrices `M + s*I` in invariance checks.
pub fn eigendecompose_sym(m: &RMat3, initial: &StateVector) -> Result<EigenSystem> {
    let mut asym: f64 = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        asym = asym.max((m[i][j] - m[j][i]).abs());
    }
    if asym > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let (lambdas, vectors) = sym_eigen3(m)?;
    let mut weights = [0.0; 3];
    for k in 0..3 {
        let o = vectors[0][k] * initial.amps[0]
            + vectors[1][k] * initial.amps[1]
            + vectors[2][k] * initial.amps[2];
        weights[k] = o.norm_sqr();
    }
    Ok(EigenSystem {
        lambdas,
        vectors,
        weights,
        initial: initial.amps,
    })
}

/// Eigendecompose the co-rotating generator for the given initial state.
pub fn eigendecompose(m: &crate::model::GeneratorM, initial: &StateVector) -> Result<EigenSystem> {
    eigendecompose_sym(m.matrix(), initial)
}

/// Evolve `initial` for a duration `t` under the eigendecomposed generator:
/// `Y(t) = sum_k <v_k|Y(0)> e^{-i TAU lambda_k t} v_k`. Negative durations
/// are meaningful (the propagator is a unitary group). The result carries
/// the co-rotating frame tag and time `initial.time + t`.
pub fn propagate(eig: &EigenSystem, initial: &StateVector, t: f64) -> StateVector {
    let mut amps = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        let v = eig.vector(k);
        let overlap = v[0] * initial.amps[0] + v[1] * initial.amps[1] + v[2] * initial.amps[2];
        let phase = cis(-TAU * eig.lambdas[k] * t);
        let coeff = overlap * phase;
        for i in 0..3 {
            amps[i] += coeff * v[i];
        }
    }
    StateVector {
        amps,
        frame: Frame::Rotating,
        time: initial.time + t,
    }
}

/// Evolve in the lab frame: propagate in the co-rotating frame and apply the
/// diagonal phase map. `initial` must be given at t = 0, where the two
/// frames coincide. Populations equal the co-rotating ones componentwise.
pub fn propagate_lab(params: &ModelParams, initial: &StateVector, t: f64) -> Result<StateVector> {
    if initial.time != 0.0 {
        return Err(Error::InvalidState(format!(
            "lab-frame propagation starts at t = 0 where the frames coincide; \
             initial state is at t = {}",
            initial.time
        )));
    }
    let eig = eigendecompose(&generator_m(params), initial)?;
    let rot = propagate(&eig, initial, t);
    let phi = frame_phase_map(params, t);
    let amps = cmat_vec(&phi, &rot.amps);
    Ok(StateVector {
        amps,
        frame: Frame::Lab,
        time: t,
    })
}

/// Number of steps for a uniform grid `{0, dt, ..., t_max}` plus validation.
fn grid_steps(t_max: f64, dt: f64, cap: usize) -> Result<usize> {
    if !(t_max.is_finite() && dt.is_finite()) || t_max <= 0.0 || dt <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need t_max > 0 and dt > 0, got t_max = {t_max}, dt = {dt}"
        )));
    }
    if dt > t_max {
        return Err(Error::InvalidParams(format!(
            "dt = {dt} exceeds t_max = {t_max}"
        )));
    }
    // Floor with a relative slack: a t_max that is a near-multiple of dt
    // (up to division round-off) still lands on the grid, while anything
    // genuinely between grid points is truncated rather than overshot.
    let steps = (t_max / dt + 1e-9).floor();
    if steps >= cap as f64 {
        return Err(Error::GridTooFine {
            samples: steps as usize + 1,
            cap,
        });
    }
    Ok((steps as usize).max(1))
}

/// Population time series on the uniform grid `{0, dt, ..., t_max}` with the
/// default sample cap.
pub fn population_series(
    params: &ModelParams,
    initial: &StateVector,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    population_series_capped(params, initial, t_max, dt, DEFAULT_SAMPLE_CAP)
}

/// Population time series with an explicit sample cap.
pub fn population_series_capped(
    params: &ModelParams,
    initial: &StateVector,
    t_max: f64,
    dt: f64,
    cap: usize,
) -> Result<Trajectory> {
    let steps = grid_steps(t_max, dt, cap)?;
    let eig = eigendecompose(&generator_m(params), initial)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut populations = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let state = propagate(&eig, initial, t);
        times.push(t);
        populations.push(state.p0().clamp(0.0, 1.0));
        states.push(state);
    }
    Ok(Trajectory {
        times,
        states,
        populations,
    })
}

/// Independent fixed-step fourth-order Runge-Kutta integration of the
/// Schroedinger equation, in either frame. Used as a verification oracle for
/// the exact eigen-propagator; `dt <= 1e-3` ns is expected for oracle-grade
/// accuracy. The returned state is NOT re-normalized, so the integrator's own
/// norm drift remains observable.
pub fn rk4_oracle(
    params: &ModelParams,
    initial: &StateVector,
    t: f64,
    dt: f64,
    frame: Frame,
) -> Result<StateVector> {
    let states = rk4_oracle_path(params, initial, &[t], dt, frame)?;
    Ok(states.into_iter().next().expect("one checkpoint requested"))
}

/// RK4 integration visiting several checkpoints in one pass (ascending,
/// nonnegative times). Returns the state at each checkpoint; accumulated
/// integrator error is carried through, exactly as a single long integration
/// would.
pub fn rk4_oracle_path(
    params: &ModelParams,
    initial: &StateVector,
    checkpoints: &[f64],
    dt: f64,
    frame: Frame,
) -> Result<Vec<StateVector>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("need dt > 0, got {dt}")));
    }
    let mut prev = 0.0_f64;
    for &c in checkpoints {
        if !c.is_finite() || c < prev {
            return Err(Error::InvalidParams(
                "checkpoints must be finite, nonnegative, and ascending".into(),
            ));
        }
        prev = c;
    }
    let total_steps = (prev / dt).ceil();
    if total_steps > RK4_STEP_CAP as f64 {
        return Err(Error::GridTooFine {
            samples: total_steps as usize,
            cap: RK4_STEP_CAP,
        });
    }

    // Right-hand side: dy/dt = -i * TAU * G(t) * y with G the generator in
    // the requested frame (constant co-rotating matrix or driven lab matrix).
    let m = generator_m(params);
    let mm = m.matrix();
    let deriv = |time: f64, y: &CVec3| -> CVec3 {
        let minus_i_tau = C64::new(0.0, -TAU);
        match frame {
            Frame::Rotating => {
                let mut out = [C64::new(0.0, 0.0); 3];
                for i in 0..3 {
                    out[i] = minus_i_tau
                        * (mm[i][0] * y[0] + mm[i][1] * y[1] + mm[i][2] * y[2]);
                }
                out
            }
            Frame::Lab => {
                let h = hamiltonian_lab(params, time);
                let hy = cmat_vec(&h, y);
                [minus_i_tau * hy[0], minus_i_tau * hy[1], minus_i_tau * hy[2]]
            }
        }
    };

    let step = |time: f64, y: &CVec3, h: f64| -> CVec3 {
        let k1 = deriv(time, y);
        let mut y2 = *y;
        for i in 0..3 {
            y2[i] += 0.5 * h * k1[i];
        }
        let k2 = deriv(time + 0.5 * h, &y2);
        let mut y3 = *y;
        for i in 0..3 {
            y3[i] += 0.5 * h * k2[i];
        }
        let k3 = deriv(time + 0.5 * h, &y3);
        let mut y4 = *y;
        for i in 0..3 {
            y4[i] += h * k3[i];
        }
        let k4 = deriv(time + h, &y4);
        let mut out = *y;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    };

    // Integer step bookkeeping: the current time is reconstructed as
    // `base + k * dt` from a whole-step counter instead of being accumulated
    // by repeated addition. Accumulation lets rounding drift grow with the
    // step count, and at high eigenfrequencies that time drift — not the
    // fourth-order truncation — would dominate the deviation from the exact
    // propagator.
    let mut y = initial.amps;
    let mut base = 0.0_f64;
    let mut whole_steps: u64 = 0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        loop {
            let now = base + whole_steps as f64 * dt;
            let remaining = target - now;
            if remaining < dt * (1.0 - 1e-12) {
                // Land exactly on the checkpoint with one shortened step;
                // slivers below dt * 1e-12 are rounding residue, not time.
                if remaining > dt * 1e-12 {
                    y = step(now, &y, remaining);
                    base = target;
                    whole_steps = 0;
                }
                break;
            }
            y = step(now, &y, dt);
            whole_steps += 1;
        }
        out.push(StateVector {
            amps: y,
            frame,
            time: target,
        });
    }
    Ok(out)
}
