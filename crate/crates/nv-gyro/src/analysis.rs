//! Quadratic least-squares fitting of QFI-versus-time curves and the
//! coupling-scaling study built on top of it.

use crate::error::{Error, Result};
use crate::metrology::qfi_time_series;
use crate::model::{Frame, ModelParams, StateVector};

/// Result of fitting `y ~ a t^2 + b t + c` over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Quadratic coefficient.
    pub coeff_a: f64,
    /// Linear coefficient.
    pub coeff_b: f64,
    /// Constant coefficient.
    pub coeff_c: f64,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
    /// Time window `(lo, hi)` the fitted samples span.
    pub window: (f64, f64),
    /// Number of samples used.
    pub n_points: usize,
}

impl FitResult {
    /// Evaluate the fitted polynomial at time `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        (self.coeff_a * t + self.coeff_b) * t + self.coeff_c
    }
}

/// Count of pairwise-distinct (bitwise-unequal) sample times.
fn distinct_times(times: &[f64]) -> usize {
    let mut sorted: Vec<f64> = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let mut count = usize::from(!sorted.is_empty());
    for w in sorted.windows(2) {
        if w[1] != w[0] {
            count += 1;
        }
    }
    count
}

/// Ordinary least squares for `y ~ a t^2 + b t + c` over all given samples.
///
/// The fit is performed on the centered and scaled abscissa
/// `u = (t - mean) / spread` (so `u` spans about `[-1, 1]`) via the 3x3
/// normal equations, then mapped back; this keeps the system well
/// conditioned even for windows far from the origin. Requires at least
/// three distinct sample times.
pub fn fit_quadratic(times: &[f64], values: &[f64]) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::InvalidParams(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams(
            "fit samples must be finite".into(),
        ));
    }
    let distinct = distinct_times(times);
    if distinct < 3 {
        return Err(Error::RankDeficient { distinct });
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let spread = times
        .iter()
        .map(|t| (t - mean).abs())
        .fold(0.0_f64, f64::max);
    // distinct >= 3 guarantees spread > 0.
    let u: Vec<f64> = times.iter().map(|t| (t - mean) / spread).collect();

    let mut m = [0.0_f64; 5];
    let mut r = [0.0_f64; 3];
    for (ui, yi) in u.iter().zip(values) {
        let mut pow = 1.0;
        for mk in m.iter_mut() {
            *mk += pow;
            pow *= ui;
        }
        r[0] += yi;
        r[1] += ui * yi;
        r[2] += ui * ui * yi;
    }
    let gram = [[m[0], m[1], m[2]], [m[1], m[2], m[3]], [m[2], m[3], m[4]]];
    let (alpha, beta, gamma) = match crate::linalg::solve3(&gram, &r) {
        Some(sol) => (sol[0], sol[1], sol[2]),
        None => return Err(Error::RankDeficient { distinct }),
    };

    let mut ss = 0.0;
    for (ui, yi) in u.iter().zip(values) {
        let resid = yi - (alpha + beta * ui + gamma * ui * ui);
        ss += resid * resid;
    }
    let rms_residual = (ss / n).sqrt();

    // Undo u = (t - mean)/spread.
    let coeff_a = gamma / (spread * spread);
    let coeff_b = beta / spread - 2.0 * gamma * mean / (spread * spread);
    let coeff_c = alpha - beta * mean / spread + gamma * mean * mean / (spread * spread);
    let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        coeff_a,
        coeff_b,
        coeff_c,
        rms_residual,
        window: (lo, hi),
        n_points: times.len(),
    })
}

/// [`fit_quadratic`] restricted to samples with `lo <= t <= hi`; the
/// recorded window is the requested one.
pub fn fit_quadratic_windowed(
    times: &[f64],
    values: &[f64],
    lo: f64,
    hi: f64,
) -> Result<FitResult> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidParams(format!(
            "need a finite window with lo < hi, got [{lo}, {hi}]"
        )));
    }
    if times.len() != values.len() {
        return Err(Error::InvalidParams(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    let mut sel_t = Vec::new();
    let mut sel_y = Vec::new();
    for (t, y) in times.iter().zip(values) {
        if *t >= lo && *t <= hi {
            sel_t.push(*t);
            sel_y.push(*y);
        }
    }
    let mut fit = fit_quadratic(&sel_t, &sel_y)?;
    fit.window = (lo, hi);
    Ok(fit)
}

/// Uniform grid `{lo, lo + dt, ...}` covering `[lo, hi]`; the endpoint is
/// included when it lands on the grid (within a relative half-ulp slack).
pub fn window_grid(lo: f64, hi: f64, dt: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && dt.is_finite()) || hi <= lo || dt <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need lo < hi and dt > 0, got window [{lo}, {hi}], dt = {dt}"
        )));
    }
    let mut times = Vec::new();
    let mut k = 0usize;
    loop {
        let t = lo + k as f64 * dt;
        if t > hi + dt * 1e-9 {
            break;
        }
        times.push(t);
        k += 1;
    }
    Ok(times)
}

/// One coupling of the scaling study: the quadratic fit of QFI(t) and the
/// invariant candidate `coeff_a * a^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    /// Drive coupling of this row.
    pub a_coupling: f64,
    /// Quadratic fit of QFI over the window.
    pub fit: FitResult,
    /// `fit.coeff_a * a_coupling^2`.
    pub product: f64,
}

/// Fit `QFI(t) ~ a_fit t^2 + ...` for each coupling in `a_values` at fixed
/// detuning, over the uniform grid `{lo, lo + dt, ..., hi}`, and report the
/// products `a_fit * a^2`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_study(
    template: &ModelParams,
    a_values: &[f64],
    delta: f64,
    window: (f64, f64),
    dt: f64,
    frame: Frame,
    initial: &StateVector,
) -> Result<Vec<ScalingRow>> {
    if a_values.is_empty() {
        return Err(Error::InvalidParams("empty coupling list".into()));
    }
    if a_values.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(Error::InvalidParams(
            "couplings must be finite and positive".into(),
        ));
    }
    let (lo, hi) = window;
    let times = window_grid(lo, hi, dt)?;
    if distinct_times(&times) < 3 {
        return Err(Error::RankDeficient {
            distinct: distinct_times(&times),
        });
    }

    let mut rows = Vec::with_capacity(a_values.len());
    for &a in a_values {
        let params = template.with_coupling(a)?.with_delta(delta);
        let series = qfi_time_series(&params, initial, &times, frame)?;
        let values: Vec<f64> = series.points.iter().map(|p| p.value).collect();
        let mut fit = fit_quadratic(&times, &values)?;
        fit.window = (lo, hi);
        rows.push(ScalingRow {
            a_coupling: a,
            fit,
            product: fit.coeff_a * a * a,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact-data fits reproduce coefficients to this absolute precision.
    const TOL_EXACT: f64 = 1e-10;

    #[test]
    fn recovers_an_exact_quadratic() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 * t * t - t + 3.0).collect();
        let fit = fit_quadratic(&times, &values).unwrap();
        assert!((fit.coeff_a - 2.0).abs() <= TOL_EXACT);
        assert!((fit.coeff_b + 1.0).abs() <= TOL_EXACT);
        assert!((fit.coeff_c - 3.0).abs() <= TOL_EXACT);
        assert!(fit.rms_residual <= TOL_EXACT);
        assert_eq!(fit.n_points, 11);
        assert_eq!(fit.window, (0.0, 10.0));
        assert!((fit.evaluate(4.0) - 31.0).abs() <= 1e-9);
    }

    #[test]
    fn recovers_a_constant() {
        let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
        let values = vec![7.0; times.len()];
        let fit = fit_quadratic(&times, &values).unwrap();
        assert!(fit.coeff_a.abs() <= TOL_EXACT);
        assert!(fit.coeff_b.abs() <= TOL_EXACT);
        assert!((fit.coeff_c - 7.0).abs() <= TOL_EXACT);
        assert!(fit.rms_residual <= TOL_EXACT);
    }

    #[test]
    fn fit_is_idempotent_on_its_own_curve() {
        // Fit noisy data, then fit the fitted curve's own samples: the
        // coefficients must reproduce themselves.
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        let times: Vec<f64> = (0..=200).map(|k| 20.0 + 0.1 * k as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 0.3 * t * t - 4.0 * t + 11.0 + rng.random_range(-0.5..0.5))
            .collect();
        let first = fit_quadratic(&times, &values).unwrap();
        let refit_values: Vec<f64> = times.iter().map(|t| first.evaluate(*t)).collect();
        let second = fit_quadratic(&times, &refit_values).unwrap();
        assert!((first.coeff_a - second.coeff_a).abs() <= 1e-10 * (1.0 + first.coeff_a.abs()));
        assert!((first.coeff_b - second.coeff_b).abs() <= 1e-10 * (1.0 + first.coeff_b.abs()));
        assert!((first.coeff_c - second.coeff_c).abs() <= 1e-10 * (1.0 + first.coeff_c.abs()));
        assert!(second.rms_residual <= 1e-10);
    }

    #[test]
    fn residuals_are_orthogonal_to_the_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        let times: Vec<f64> = (0..=300).map(|k| 0.05 * k as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 1.7 * t * t + 0.2 * t - 3.0 + rng.random_range(-1.0..1.0))
            .collect();
        let fit = fit_quadratic(&times, &values).unwrap();
        let max_y = values.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let spread = times
            .iter()
            .map(|t| (t - mean).abs())
            .fold(0.0_f64, f64::max);
        let mut dots = [0.0_f64; 3];
        for (t, y) in times.iter().zip(&values) {
            let resid = y - fit.evaluate(*t);
            let u = (t - mean) / spread;
            dots[0] += resid;
            dots[1] += resid * u;
            dots[2] += resid * u * u;
        }
        for d in dots {
            assert!(
                d.abs() <= 1e-9 * times.len() as f64 * (1.0 + max_y),
                "normal equations violated: dot = {d:e}"
            );
        }
    }

    #[test]
    fn windowed_fit_filters_samples() {
        let times: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| t * t).collect();
        let fit = fit_quadratic_windowed(&times, &values, 20.0, 40.0).unwrap();
        assert_eq!(fit.window, (20.0, 40.0));
        assert_eq!(fit.n_points, 41);
        assert!((fit.coeff_a - 1.0).abs() <= 1e-9);
        assert!(fit_quadratic_windowed(&times, &values, 40.0, 20.0).is_err());
        // A window containing a single grid point cannot support a parabola.
        assert!(matches!(
            fit_quadratic_windowed(&times, &values, 10.1, 10.4),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let times = vec![1.0, 1.0, 2.0, 2.0, 1.0];
        let values = vec![3.0; 5];
        match fit_quadratic(&times, &values) {
            Err(Error::RankDeficient { distinct }) => assert_eq!(distinct, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        assert!(fit_quadratic(&[], &[]).is_err());
        assert!(fit_quadratic(&[1.0, 2.0], &[1.0]).is_err());
        assert!(fit_quadratic(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn frozen_scaling_rows_at_reference_settings() {
        let template = ModelParams::from_delta_coupling(2.87, 0.0, 10.0).unwrap();
        let rows = scaling_study(
            &template,
            &[5.0, 10.0, 15.0],
            20.0,
            (0.0, 30.0),
            0.05,
            Frame::Rotating,
            &StateVector::ket0(Frame::Rotating),
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        let want = [
            (5.0, 15.794_595_480_649_491, -0.012_645_551_852_570_927, 0.049_206_605_414_362_906, 394.864_887_016_237_3),
            (10.0, 34.450_887_480_222_36, 0.003_320_630_072_131_344_5, -0.008_803_954_164_104_98, 3_445.088_748_022_236),
            (15.0, 38.868_826_332_987_204, 0.001_171_963_839_979_050_8, -0.000_701_613_343_232_117_6, 8_745.485_924_922_12),
        ];
        for (row, (a, ca, cb, cc, product)) in rows.iter().zip(want) {
            assert_eq!(row.a_coupling, a);
            assert!(
                (row.fit.coeff_a - ca).abs() <= 1e-7 * ca.abs(),
                "coeff_a at a = {a}: {} vs {ca}",
                row.fit.coeff_a
            );
            assert!((row.fit.coeff_b - cb).abs() <= 1e-6);
            assert!((row.fit.coeff_c - cc).abs() <= 1e-6);
            assert!(
                (row.product - product).abs() <= 1e-7 * product,
                "product at a = {a}: {} vs {product}",
                row.product
            );
            assert_eq!(row.fit.n_points, 601);
            assert_eq!(row.fit.window, (0.0, 30.0));
        }
    }

    #[test]
    fn scaling_study_validates_inputs() {
        let template = ModelParams::from_delta_coupling(2.87, 0.0, 10.0).unwrap();
        let ket0 = StateVector::ket0(Frame::Rotating);
        let call = |a_values: &[f64], window: (f64, f64), dt: f64| {
            scaling_study(
                &template,
                a_values,
                20.0,
                window,
                dt,
                Frame::Rotating,
                &ket0,
            )
        };
        assert!(call(&[], (0.0, 30.0), 0.05).is_err());
        assert!(call(&[-1.0], (0.0, 30.0), 0.05).is_err());
        assert!(call(&[5.0], (30.0, 0.0), 0.05).is_err());
        assert!(call(&[5.0], (0.0, 30.0), -0.1).is_err());
    }
}
