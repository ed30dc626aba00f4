//! Exact cosine-line decomposition of the |0> population signal, a
//! numerical periodogram cross-check, the gap-coincidence (frequency
//! crossing) finder, and beat-regime classification.

use crate::error::{Error, Result};
use crate::evolution::{eigendecompose, EigenSystem, Trajectory};
use crate::linalg::TAU;
use crate::model::{generator_m, Frame, ModelParams, StateVector};
use rustfft::FftPlanner;

/// Absolute frequency tolerance under which two lines count as equal and
/// are merged (amplitudes summed). Eigenvalue gaps are O(1)-O(100) here, so
/// 1e-9 is far below any physical splitting yet far above solver noise.
pub const MERGE_TOL: f64 = 1e-9;

/// Lines with amplitude below this are dropped as numerically absent.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Initial-state gate for the analytic spectrum: the population signal is a
/// pure cosine series only when the system starts in |0> (up to a global
/// phase), so the off-middle amplitudes must vanish within this tolerance.
const KET0_TOL: f64 = 1e-9;

/// Minimum number of samples the periodogram accepts.
pub const MIN_PERIODOGRAM_SAMPLES: usize = 64;

/// One cosine line of the population signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    /// Nonnegative line frequency (an eigenvalue gap).
    pub omega: f64,
    /// Cosine amplitude.
    pub k: f64,
    /// Number of eigenvalue-pair terms folded into this line (2 when two
    /// gaps coincided and were merged).
    pub multiplicity: usize,
}

/// DC weight plus up to three cosine lines, sorted by amplitude descending:
/// `P(t) = k0 + sum_i k_i cos(TAU * omega_i * t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// DC weight `sum_k c_k^2`.
    pub k0: f64,
    /// Oscillatory lines, amplitude-descending.
    pub lines: Vec<SpectralLine>,
}

impl Spectrum {
    /// Rebuild the population signal at time `t` from the line content.
    pub fn reconstruct(&self, t: f64) -> f64 {
        let mut p = self.k0;
        for line in &self.lines {
            p += line.k * (TAU * line.omega * t).cos();
        }
        p
    }

    /// DC weight plus all line amplitudes; equals P(0).
    pub fn total_weight(&self) -> f64 {
        self.k0 + self.lines.iter().map(|l| l.k).sum::<f64>()
    }
}

/// Exact line content of `P(t) = |<0|psi(t)>|^2` from the eigendecomposition:
/// DC weight `sum c_k^2` and a line `2 c_j c_k` at each eigenvalue gap
/// `lambda_k - lambda_j`. Gaps below [`MERGE_TOL`] fold into the DC weight;
/// coinciding line frequencies merge; amplitudes below [`AMPLITUDE_FLOOR`]
/// are dropped.
///
/// Only defined when the decomposition was taken for the initial state |0>
/// (up to a global phase): for any other start the cross terms acquire
/// phases that a cosine series cannot represent.
pub fn analytic_spectrum(eig: &EigenSystem) -> Result<Spectrum> {
    let pops = [
        eig.initial[0].norm_sqr(),
        eig.initial[1].norm_sqr(),
        eig.initial[2].norm_sqr(),
    ];
    if eig.initial[0].norm() > KET0_TOL || eig.initial[2].norm() > KET0_TOL {
        return Err(Error::UnsupportedInitial { populations: pops });
    }

    let c = eig.weights;
    let mut k0 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(3);
    for (j, k) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let omega = eig.lambdas[k] - eig.lambdas[j]; // nonnegative: ascending order
        let amp = 2.0 * c[j] * c[k];
        if omega.abs() <= MERGE_TOL {
            // Degenerate gap: the cosine is flat, fold into DC.
            k0 += amp;
        } else {
            raw.push((omega, amp));
        }
    }

    // Merge coinciding frequencies (amplitude-weighted mean frequency).
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequencies"));
    let mut merged: Vec<SpectralLine> = Vec::with_capacity(raw.len());
    for (omega, amp) in raw {
        match merged.last_mut() {
            Some(last) if (omega - last.omega).abs() <= MERGE_TOL => {
                let total = last.k + amp;
                if total > 0.0 {
                    last.omega = (last.omega * last.k + omega * amp) / total;
                }
                last.k = total;
                last.multiplicity += 1;
            }
            _ => merged.push(SpectralLine {
                omega,
                k: amp,
                multiplicity: 1,
            }),
        }
    }
    merged.retain(|l| l.k >= AMPLITUDE_FLOOR);

    // Amplitude-descending, frequency as a deterministic tiebreak.
    merged.sort_by(|a, b| {
        b.k.partial_cmp(&a.k)
            .expect("finite amplitudes")
            .then(a.omega.partial_cmp(&b.omega).expect("finite frequencies"))
    });
    Ok(Spectrum { k0, lines: merged })
}

/// One row of a detuning sweep: line frequencies and amplitudes in
/// amplitude-descending order, absent lines reported as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Detuning of this row.
    pub delta: f64,
    /// Line frequencies, amplitude-descending; 0 when absent.
    pub omegas: [f64; 3],
    /// DC weight.
    pub k0: f64,
    /// Line amplitudes matching `omegas`; 0 when absent.
    pub ks: [f64; 3],
}

/// Analytic spectrum at every detuning of the grid, initial state |0>.
pub fn sweep_spectrum(template: &ModelParams, delta_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidParams("empty detuning grid".into()));
    }
    let ket0 = StateVector::ket0(Frame::Rotating);
    let mut rows = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let params = template.with_delta(delta);
        let eig = eigendecompose(&generator_m(&params), &ket0)?;
        let spec = analytic_spectrum(&eig)?;
        let mut omegas = [0.0; 3];
        let mut ks = [0.0; 3];
        for (i, line) in spec.lines.iter().take(3).enumerate() {
            omegas[i] = line.omega;
            ks[i] = line.k;
        }
        rows.push(SweepRow {
            delta,
            omegas,
            k0: spec.k0,
            ks,
        });
    }
    Ok(rows)
}

/// Gap-coincidence indicator `g(delta) = lambda_3 - 2 lambda_2 + lambda_1`
/// (ascending eigenvalues). It vanishes exactly when the middle eigenvalue
/// is the midpoint of the extremes, i.e. when the two smaller eigenvalue
/// gaps coincide; it is invariant under shifting the generator by s*I.
pub fn crossing_indicator(template: &ModelParams, delta: f64) -> Result<f64> {
    let params = template.with_delta(delta);
    let eig = eigendecompose(
        &generator_m(&params),
        &StateVector::ket0(Frame::Rotating),
    )?;
    Ok(eig.lambdas[2] - 2.0 * eig.lambdas[1] + eig.lambdas[0])
}

/// Bisection width at which the crossing search stops; the indicator has an
/// O(1) slope at its roots, so this pins |g| around 1e-12, well inside the
/// 1e-10 acceptance gate.
const CROSSING_BRACKET_TOL: f64 = 1e-12;

/// Locate the detuning where two eigenvalue gaps coincide, by bisection of
/// [`crossing_indicator`] over `[delta_lo, delta_hi]`. Fails with
/// [`Error::NoSignChange`] when the indicator does not change sign on the
/// bracket.
pub fn find_frequency_crossing(
    template: &ModelParams,
    delta_lo: f64,
    delta_hi: f64,
) -> Result<f64> {
    if !(delta_lo.is_finite() && delta_hi.is_finite()) || delta_lo >= delta_hi {
        return Err(Error::InvalidParams(format!(
            "need a finite bracket with delta_lo < delta_hi, got [{delta_lo}, {delta_hi}]"
        )));
    }
    let g_lo = crossing_indicator(template, delta_lo)?;
    let g_hi = crossing_indicator(template, delta_hi)?;
    if g_lo == 0.0 {
        return Ok(delta_lo);
    }
    if g_hi == 0.0 {
        return Ok(delta_hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoSignChange {
            lo: delta_lo,
            hi: delta_hi,
            g_lo,
            g_hi,
        });
    }
    let (mut lo, mut hi, mut g_lo) = (delta_lo, delta_hi, g_lo);
    while hi - lo > CROSSING_BRACKET_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let g_mid = crossing_indicator(template, mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let g_root = crossing_indicator(template, root)?;
    if g_root.abs() > 1e-10 {
        return Err(Error::Inconsistency(format!(
            "crossing bisection converged to delta = {root} but |g| = {:e} > 1e-10",
            g_root.abs()
        )));
    }
    Ok(root)
}

/// Oscillation regime of a population spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeatClass {
    /// Exactly one oscillatory line.
    SingleLine,
    /// Two lines coincide (merged) or nearly coincide with clearly unequal
    /// amplitudes.
    Crossed,
    /// Two near-frequency lines of comparable amplitude: a slow envelope
    /// modulates a fast carrier.
    Beating,
    /// Anything else (well-separated lines, or no lines at all).
    Generic,
}

impl BeatClass {
    /// Canonical lowercase name for CLI output.
    pub fn as_str(self) -> &'static str {
        match self {
            BeatClass::SingleLine => "single_line",
            BeatClass::Crossed => "crossed",
            BeatClass::Beating => "beating",
            BeatClass::Generic => "generic",
        }
    }
}

impl std::fmt::Display for BeatClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification outcome plus the beat descriptor, where applicable:
/// envelope frequency (the gap of the closest line pair) and modulation
/// ratio (their min/max amplitude ratio).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatReport {
    /// Assigned regime.
    pub class: BeatClass,
    /// `|omega_a - omega_b|` of the closest pair; 0 for an exact merge.
    pub envelope_omega: Option<f64>,
    /// `min(K_a, K_b) / max(K_a, K_b)` of that pair.
    pub modulation_ratio: Option<f64>,
}

/// Classify the oscillation regime of a spectrum.
///
/// Rules, applied in order: one line is `single_line`; a merged line (two
/// coinciding gaps) is `crossed`; otherwise the closest-frequency pair is
/// examined — relative gap below `closeness` means the lines effectively
/// overlap, and the pair is `beating` when the amplitudes are balanced
/// (ratio above `balance`) or `crossed` when one line dominates; everything
/// else is `generic`.
pub fn classify_beat(spec: &Spectrum, closeness: f64, balance: f64) -> Result<BeatReport> {
    for (name, v) in [("closeness", closeness), ("balance", balance)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParams(format!(
                "{name} threshold must lie strictly in (0, 1), got {v}"
            )));
        }
    }
    let n = spec.lines.len();
    if n == 1 {
        return Ok(BeatReport {
            class: BeatClass::SingleLine,
            envelope_omega: None,
            modulation_ratio: None,
        });
    }
    if spec.lines.iter().any(|l| l.multiplicity > 1) {
        return Ok(BeatReport {
            class: BeatClass::Crossed,
            envelope_omega: Some(0.0),
            modulation_ratio: None,
        });
    }
    if n < 2 {
        return Ok(BeatReport {
            class: BeatClass::Generic,
            envelope_omega: None,
            modulation_ratio: None,
        });
    }
    // Closest-frequency pair among the (up to three) lines.
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (spec.lines[i].omega - spec.lines[j].omega).abs();
            if best.is_none_or(|(_, _, g)| gap < g) {
                best = Some((i, j, gap));
            }
        }
    }
    let (i, j, gap) = best.expect("at least one pair");
    let (ka, kb) = (spec.lines[i].k, spec.lines[j].k);
    let omega_max = spec.lines[i].omega.max(spec.lines[j].omega);
    let rel_gap = if omega_max > 0.0 { gap / omega_max } else { 0.0 };
    let ratio = ka.min(kb) / ka.max(kb);
    if rel_gap < closeness {
        let class = if ratio > balance {
            BeatClass::Beating
        } else {
            BeatClass::Crossed
        };
        return Ok(BeatReport {
            class,
            envelope_omega: Some(gap),
            modulation_ratio: Some(ratio),
        });
    }
    Ok(BeatReport {
        class: BeatClass::Generic,
        envelope_omega: None,
        modulation_ratio: None,
    })
}

/// Taper applied to the samples before the discrete Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taper {
    /// No taper: maximal resolution, strongest leakage.
    Rectangular,
    /// Hann taper: suppressed sidelobes at twice the mainlobe width.
    Hann,
}

impl Taper {
    /// Canonical lowercase name.
    pub fn as_str(self) -> &'static str {
        match self {
            Taper::Rectangular => "rectangular",
            Taper::Hann => "hann",
        }
    }
}

impl std::str::FromStr for Taper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" => Ok(Taper::Rectangular),
            "hann" => Ok(Taper::Hann),
            other => Err(Error::InvalidConfig(format!(
                "unknown taper `{other}` (expected `rectangular` or `hann`)"
            ))),
        }
    }
}

impl std::fmt::Display for Taper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One-sided sampled magnitude spectrum of a population trajectory.
///
/// Magnitudes are normalized so that a pure cosine of amplitude K produces
/// a peak of height ~K (taper-corrected); the resolution after zero padding
/// is [`Self::bin_width`].
#[derive(Debug, Clone)]
pub struct Periodogram {
    /// Frequency of each bin.
    pub freqs: Vec<f64>,
    /// Normalized magnitude of each bin.
    pub magnitudes: Vec<f64>,
    /// Padded bin spacing `1 / (n_padded * dt)`.
    pub bin_width: f64,
}

impl Periodogram {
    /// Local magnitude maxima refined by three-point quadratic
    /// interpolation, as (frequency, magnitude) pairs.
    pub fn interpolated_peaks(&self) -> Vec<(f64, f64)> {
        let m = &self.magnitudes;
        let mut peaks = Vec::new();
        for k in 1..m.len().saturating_sub(1) {
            if m[k] > m[k - 1] && m[k] > m[k + 1] {
                let denom = m[k - 1] - 2.0 * m[k] + m[k + 1];
                let mut delta = 0.0;
                if denom < 0.0 {
                    delta = 0.5 * (m[k - 1] - m[k + 1]) / denom;
                    delta = delta.clamp(-0.5, 0.5);
                }
                let freq = (k as f64 + delta) * self.bin_width;
                let height = m[k] - 0.25 * (m[k - 1] - m[k + 1]) * delta;
                peaks.push((freq, height));
            }
        }
        peaks
    }

    /// The interpolated peak closest in frequency to `omega`, if any peak
    /// exists.
    pub fn nearest_peak(&self, omega: f64) -> Option<(f64, f64)> {
        self.interpolated_peaks()
            .into_iter()
            .min_by(|a, b| {
                (a.0 - omega)
                    .abs()
                    .partial_cmp(&(b.0 - omega).abs())
                    .expect("finite frequencies")
            })
    }
}

/// Discrete magnitude spectrum of the population samples with zero padding
/// and optional tapering. Requires a uniform grid of at least
/// [`MIN_PERIODOGRAM_SAMPLES`] samples.
pub fn periodogram(
    traj: &Trajectory,
    zero_pad_factor: usize,
    taper: Taper,
) -> Result<Periodogram> {
    let n = traj.times.len();
    if n < MIN_PERIODOGRAM_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_PERIODOGRAM_SAMPLES,
            got: n,
        });
    }
    if zero_pad_factor == 0 {
        return Err(Error::InvalidParams(
            "zero_pad_factor must be at least 1".into(),
        ));
    }
    let dt = traj.times[1] - traj.times[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonUniformGrid { max_dev: f64::NAN });
    }
    // Grids built as k*dt keep spacings within a few ulps; anything beyond
    // this absolute tolerance is genuinely non-uniform.
    let tol = 1e-9 * dt.max(1.0);
    let mut max_dev = 0.0_f64;
    for w in traj.times.windows(2) {
        max_dev = max_dev.max(((w[1] - w[0]) - dt).abs());
    }
    if max_dev > tol {
        return Err(Error::NonUniformGrid { max_dev });
    }

    let weights: Vec<f64> = match taper {
        Taper::Rectangular => vec![1.0; n],
        Taper::Hann => (0..n)
            .map(|i| 0.5 * (1.0 - (TAU * i as f64 / (n as f64 - 1.0)).cos()))
            .collect(),
    };
    let wsum: f64 = weights.iter().sum();

    let n_pad = n * zero_pad_factor;
    let mut buf = vec![crate::linalg::C64::new(0.0, 0.0); n_pad];
    for i in 0..n {
        buf[i] = crate::linalg::C64::new(traj.populations[i] * weights[i], 0.0);
    }
    FftPlanner::new().plan_fft_forward(n_pad).process(&mut buf);

    let half = n_pad / 2;
    let bin_width = 1.0 / (n_pad as f64 * dt);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut magnitudes = Vec::with_capacity(half + 1);
    for (k, value) in buf.iter().take(half + 1).enumerate() {
        let one_sided = if k == 0 || (n_pad.is_multiple_of(2) && k == half) {
            1.0
        } else {
            2.0
        };
        freqs.push(k as f64 * bin_width);
        magnitudes.push(one_sided * value.norm() / wsum);
    }
    Ok(Periodogram {
        freqs,
        magnitudes,
        bin_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{population_series, propagate};
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Frozen-value tolerance: analytic lines are exact up to the
    /// eigensolver's machine-precision output.
    const TOL_LINE: f64 = 1e-9;

    fn ket0() -> StateVector {
        StateVector::ket0(Frame::Rotating)
    }

    fn spectrum_at(delta: f64, a: f64) -> Spectrum {
        let p = ModelParams::from_delta_coupling(2.87, delta, a).unwrap();
        let eig = eigendecompose(&generator_m(&p), &ket0()).unwrap();
        analytic_spectrum(&eig).unwrap()
    }

    #[test]
    fn zero_detuning_is_a_single_line() {
        let spec = spectrum_at(0.0, 10.0);
        assert_eq!(spec.lines.len(), 1);
        assert!((spec.k0 - 0.505_095_597_590_261).abs() <= 1e-10);
        assert!((spec.lines[0].omega - 28.429_507_558_169_206).abs() <= TOL_LINE);
        assert!((spec.lines[0].k - 0.494_904_402_409_739).abs() <= 1e-10);
        assert!((spec.total_weight() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_coupling_is_pure_dc() {
        let spec = spectrum_at(17.0, 0.0);
        assert!(spec.lines.is_empty());
        assert!((spec.k0 - 1.0).abs() <= 1e-12);
        // Degenerate corner: delta = 0 and a = 0 has a zero eigenvalue gap
        // whose (zero-amplitude) line folds into DC without incident.
        let corner = spectrum_at(0.0, 0.0);
        assert!(corner.lines.is_empty());
        assert!((corner.k0 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn frozen_lines_near_the_crossing() {
        let spec = spectrum_at(10.8, 10.0);
        assert_eq!(spec.lines.len(), 3);
        assert!((spec.k0 - 0.340_253_750_757_030_1).abs() <= 1e-10);
        let want = [
            (17.729_870_368_462_205, 0.269_544_515_428_085_05),
            (35.742_354_564_412_38, 0.197_959_305_701_499_94),
            (18.012_484_195_950_18, 0.192_242_428_113_384_82),
        ];
        for (line, (omega, k)) in spec.lines.iter().zip(want) {
            assert!((line.omega - omega).abs() <= TOL_LINE);
            assert!((line.k - k).abs() <= 1e-10);
        }
    }

    #[test]
    fn frozen_lines_in_the_beating_regime() {
        let spec = spectrum_at(40.0, 10.0);
        assert_eq!(spec.lines.len(), 3);
        assert!((spec.k0 - 0.794_376_856_633_709_5).abs() <= 1e-10);
        let want = [
            (40.046_392_846_723_926, 0.112_015_496_191_680_43),
            (44.826_257_814_699_25, 0.087_395_709_339_973_91),
            (84.872_650_661_423_17, 0.006_211_937_834_637_146_6),
        ];
        for (line, (omega, k)) in spec.lines.iter().zip(want) {
            assert!((line.omega - omega).abs() <= TOL_LINE);
            assert!((line.k - k).abs() <= 1e-10);
        }
        // The two dominant lines are close in frequency with comparable
        // amplitudes: the beat signature.
        let gap = (spec.lines[0].omega - spec.lines[1].omega).abs();
        assert!(gap < 0.12 * spec.lines[1].omega.max(spec.lines[0].omega));
    }

    #[test]
    fn weights_sum_to_p0_for_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let delta = rng.random_range(0.0..50.0);
            let a = rng.random_range(0.5..20.0);
            let spec = spectrum_at(delta, a);
            assert!((spec.total_weight() - 1.0).abs() <= 1e-12);
            for line in &spec.lines {
                assert!(line.omega > 0.0 && line.k > 0.0);
            }
            // Largest gap equals the sum of the two smaller gaps.
            if spec.lines.len() == 3 {
                let mut omegas: Vec<f64> = spec.lines.iter().map(|l| l.omega).collect();
                omegas.sort_by(|x, y| x.partial_cmp(y).unwrap());
                assert!((omegas[2] - omegas[0] - omegas[1]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn reconstruction_matches_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7777);
        for &(delta, a) in &[(20.0, 10.0), (10.8, 10.0), (3.3, 6.0)] {
            let p = ModelParams::from_delta_coupling(2.87, delta, a).unwrap();
            let eig = eigendecompose(&generator_m(&p), &ket0()).unwrap();
            let spec = analytic_spectrum(&eig).unwrap();
            for _ in 0..200 {
                let t = rng.random_range(0.0..25.0);
                let direct = propagate(&eig, &ket0(), t).p0();
                assert!(
                    (spec.reconstruct(t) - direct).abs() <= 1e-10,
                    "line reconstruction at t = {t}"
                );
            }
        }
    }

    #[test]
    fn spectrum_rejects_other_initial_states() {
        let p = ModelParams::from_delta_coupling(2.87, 12.0, 9.0).unwrap();
        let plus = StateVector::normalized(
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            Frame::Rotating,
            0.0,
        )
        .unwrap();
        let eig = eigendecompose(&generator_m(&p), &plus).unwrap();
        assert!(matches!(
            analytic_spectrum(&eig),
            Err(Error::UnsupportedInitial { .. })
        ));
        // A pure global phase on |0> stays acceptable.
        let phased = StateVector::normalized(
            [
                C64::new(0.0, 0.0),
                C64::new(0.6, 0.8),
                C64::new(0.0, 0.0),
            ],
            Frame::Rotating,
            0.0,
        )
        .unwrap();
        let eig2 = eigendecompose(&generator_m(&p), &phased).unwrap();
        assert!(analytic_spectrum(&eig2).is_ok());
    }

    #[test]
    fn sweep_rows_cover_grid_in_order() {
        let template = ModelParams::from_delta_coupling(2.87, 0.0, 10.0).unwrap();
        let rows = sweep_spectrum(&template, &[0.0, 10.8, 40.0]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].delta, 0.0);
        // The zero-detuning row has exactly one line, zeros elsewhere.
        assert!(rows[0].ks[0] > 0.49);
        assert_eq!(rows[0].ks[1], 0.0);
        assert_eq!(rows[0].omegas[2], 0.0);
        for row in &rows {
            let total = row.k0 + row.ks.iter().sum::<f64>();
            assert!((total - 1.0).abs() <= 1e-12);
        }
        // Near the crossing two of the three line frequencies nearly agree.
        let near: Vec<f64> = rows[1].omegas.to_vec();
        let close = (near[0] - near[2]).abs().min((near[0] - near[1]).abs());
        assert!(close < 0.3, "two nearly overlapping frequencies expected");
        assert!(sweep_spectrum(&template, &[]).is_err());
    }

    #[test]
    fn crossing_is_found_to_high_precision() {
        let template = ModelParams::from_delta_coupling(2.87, 0.0, 10.0).unwrap();
        let root = find_frequency_crossing(&template, 5.0, 20.0).unwrap();
        assert!((root - 10.045_656_330_529_708).abs() <= 1e-9);
        let g = crossing_indicator(&template, root).unwrap();
        assert!(g.abs() <= 1e-10);
        // Shifting both rotation rates by the same amount moves nothing.
        let shifted = ModelParams::new(
            template.d_zfs,
            template.g_e,
            template.mu_b,
            template.b_field,
            template.omega_field + 123.0,
            template.omega_rot + 123.0,
        )
        .unwrap();
        let root_shifted = find_frequency_crossing(&shifted, 5.0, 20.0).unwrap();
        assert_eq!(root, root_shifted);
    }

    #[test]
    fn crossing_reports_missing_sign_change() {
        // With zero coupling the indicator is positive on [1, 5] for the
        // conventional splitting (its true root sits below 1), so the
        // bracket must be rejected.
        let template = ModelParams::from_delta_coupling(2.87, 0.0, 0.0).unwrap();
        assert!(matches!(
            find_frequency_crossing(&template, 1.0, 5.0),
            Err(Error::NoSignChange { .. })
        ));
        assert!(find_frequency_crossing(&template, 5.0, 5.0).is_err());
    }

    #[test]
    fn classify_distinguishes_the_three_regimes() {
        let single = classify_beat(&spectrum_at(0.0, 10.0), 0.15, 0.75).unwrap();
        assert_eq!(single.class, BeatClass::SingleLine);

        // Near the crossing: two lines nearly coincide but their amplitudes
        // are unbalanced (ratio ~0.713), so the pair reads as crossed.
        let crossed = classify_beat(&spectrum_at(10.8, 10.0), 0.15, 0.75).unwrap();
        assert_eq!(crossed.class, BeatClass::Crossed);
        let ratio = crossed.modulation_ratio.unwrap();
        assert!((ratio - 0.713_212_167_600_848_3).abs() <= 1e-9);

        // Far detuning: close pair with balanced amplitudes, a textbook beat.
        let beating = classify_beat(&spectrum_at(40.0, 10.0), 0.15, 0.75).unwrap();
        assert_eq!(beating.class, BeatClass::Beating);
        assert!(
            (beating.envelope_omega.unwrap() - 4.779_864_967_975_321).abs() <= 1e-9,
            "beat envelope frequency"
        );
        let r = beating.modulation_ratio.unwrap();
        assert!((r - 0.780_210_884_308_567_1).abs() <= 1e-9);

        // Intermediate detuning with well-separated lines: generic.
        let generic = classify_beat(&spectrum_at(20.0, 10.0), 0.05, 0.75).unwrap();
        assert_eq!(generic.class, BeatClass::Generic);

        // An exactly merged spectrum is crossed regardless of thresholds.
        let merged = Spectrum {
            k0: 0.4,
            lines: vec![
                SpectralLine {
                    omega: 18.0,
                    k: 0.45,
                    multiplicity: 2,
                },
                SpectralLine {
                    omega: 36.0,
                    k: 0.15,
                    multiplicity: 1,
                },
            ],
        };
        assert_eq!(
            classify_beat(&merged, 0.15, 0.75).unwrap().class,
            BeatClass::Crossed
        );

        // No oscillatory content at all: generic.
        let flat = Spectrum {
            k0: 1.0,
            lines: vec![],
        };
        assert_eq!(
            classify_beat(&flat, 0.15, 0.75).unwrap().class,
            BeatClass::Generic
        );

        // Threshold domain is validated.
        assert!(classify_beat(&flat, 0.0, 0.5).is_err());
        assert!(classify_beat(&flat, 0.5, 1.0).is_err());
    }

    #[test]
    fn periodogram_of_constant_signal_concentrates_at_dc() {
        // Without zero padding the transform of a constant vanishes off
        // DC exactly; padding would smear the DC mainlobe into the
        // neighboring (one-sided doubled) bins.
        let p = ModelParams::from_delta_coupling(2.87, 5.0, 0.0).unwrap();
        let traj = population_series(&p, &ket0(), 1.0, 0.01).unwrap();
        let pg = periodogram(&traj, 1, Taper::Rectangular).unwrap();
        assert!((pg.magnitudes[0] - 1.0).abs() <= 1e-12);
        for m in &pg.magnitudes[1..] {
            assert!(*m <= 1e-12, "off-DC bin should vanish, got {m}");
        }
        // The padded variant still normalizes DC to the signal mean.
        let padded = periodogram(&traj, 8, Taper::Rectangular).unwrap();
        assert!((padded.magnitudes[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn periodogram_locates_a_synthetic_cosine() {
        // P(t) = 0.5 + 0.5 cos(TAU * 3 * t), dt = 0.01, t_max = 20.
        let dt = 0.01;
        let n = 2001;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let populations: Vec<f64> = times
            .iter()
            .map(|&t| 0.5 + 0.5 * (TAU * 3.0 * t).cos())
            .collect();
        let states = vec![ket0(); n];
        let traj = Trajectory {
            times,
            states,
            populations,
        };
        let pg = periodogram(&traj, 8, Taper::Rectangular).unwrap();
        let (freq, height) = pg.nearest_peak(3.0).unwrap();
        assert!((freq - 3.0).abs() <= pg.bin_width);
        assert!((height - 0.5).abs() <= 0.05);
    }

    #[test]
    fn periodogram_peaks_match_analytic_lines() {
        let p = ModelParams::from_delta_coupling(2.87, 20.0, 10.0).unwrap();
        let eig = eigendecompose(&generator_m(&p), &ket0()).unwrap();
        let spec = analytic_spectrum(&eig).unwrap();
        let traj = population_series(&p, &ket0(), 20.0, 0.002).unwrap();
        let pg = periodogram(&traj, 8, Taper::Hann).unwrap();
        for line in &spec.lines {
            let (freq, _) = pg.nearest_peak(line.omega).unwrap();
            assert!(
                (freq - line.omega).abs() <= pg.bin_width,
                "line at {} matched to {}",
                line.omega,
                freq
            );
        }
    }

    #[test]
    fn periodogram_input_guards() {
        let p = ModelParams::from_delta_coupling(2.87, 5.0, 3.0).unwrap();
        let short = population_series(&p, &ket0(), 0.05, 0.001).unwrap();
        assert!(matches!(
            periodogram(&short, 8, Taper::Rectangular),
            Err(Error::TooFewSamples { .. })
        ));
        let mut warped = population_series(&p, &ket0(), 1.0, 0.01).unwrap();
        warped.times[40] += 0.002;
        assert!(matches!(
            periodogram(&warped, 8, Taper::Rectangular),
            Err(Error::NonUniformGrid { .. })
        ));
        let ok = population_series(&p, &ket0(), 1.0, 0.01).unwrap();
        assert!(periodogram(&ok, 0, Taper::Rectangular).is_err());
    }
}
