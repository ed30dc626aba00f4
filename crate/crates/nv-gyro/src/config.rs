//! Run configuration: defaults, `key = value` config-file parsing with
//! line-numbered diagnostics, validation, and a canonical dump that
//! round-trips through the parser.

use crate::error::{Error, Result};
use crate::model::{Frame, ModelParams, StateVector, SQRT_2};
use crate::spectrum::Taper;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Output encoding for scalar-style results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Comma-separated tables (the default; scalar results become a
    /// one-row table).
    Csv,
    /// One JSON object of key/value pairs per scalar result.
    KvJson,
}

impl OutputFormat {
    /// Canonical lowercase name.
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::KvJson => "kv-json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "kv-json" => Ok(OutputFormat::KvJson),
            other => Err(Error::InvalidConfig(format!(
                "unknown format `{other}` (expected `csv` or `kv-json`)"
            ))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complete run configuration. Every command reads the subset it needs.
///
/// The field coupling is governed by `a` and `b_mt`: at most one may be
/// set; when neither is, the coupling defaults to `a = 10`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Zero-field splitting (config key `d`).
    pub d_zfs: f64,
    /// Electron Lande factor.
    pub g_e: f64,
    /// Bohr magneton in the per-mT unit.
    pub mu_b: f64,
    /// Magnetic field in mT, if given directly.
    pub b_mt: Option<f64>,
    /// Drive coupling, if given directly.
    pub a: Option<f64>,
    /// Rotation rate of the transverse field.
    pub omega_field: f64,
    /// Detuning (mechanical rotation rate minus field rotation rate).
    pub delta: f64,
    /// Initial amplitudes as re/im pairs for |1>, |0>, |-1>.
    pub initial: [f64; 6],
    /// Frame for state output and QFI evaluation.
    pub frame: Frame,
    /// Simulation horizon.
    pub t_max: f64,
    /// Simulation sample spacing.
    pub dt: f64,
    /// Sweep lower detuning.
    pub delta_lo: f64,
    /// Sweep upper detuning.
    pub delta_hi: f64,
    /// Number of sweep grid points.
    pub delta_steps: usize,
    /// Fixed evaluation time for detuning sweeps.
    pub t_fixed: f64,
    /// Fit window lower edge.
    pub window_lo: f64,
    /// Fit window upper edge.
    pub window_hi: f64,
    /// Sample spacing for fit grids.
    pub fit_dt: f64,
    /// Periodogram zero-padding factor.
    pub zero_pad: usize,
    /// Periodogram taper.
    pub taper: Taper,
    /// Relative frequency gap under which two lines count as close.
    pub closeness: f64,
    /// Amplitude ratio above which a close pair counts as balanced.
    pub balance: f64,
    /// Couplings for the scaling study.
    pub a_list: Vec<f64>,
    /// Output file (stdout when absent).
    pub output: Option<PathBuf>,
    /// Scalar output encoding.
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d_zfs: 2.87,
            g_e: 2.0,
            mu_b: 14.0,
            b_mt: None,
            a: None,
            omega_field: 0.0,
            delta: 0.0,
            initial: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            frame: Frame::Rotating,
            t_max: 10.0,
            dt: 0.001,
            delta_lo: 0.0,
            delta_hi: 50.0,
            delta_steps: 501,
            t_fixed: 10.0,
            window_lo: 0.0,
            window_hi: 30.0,
            fit_dt: 0.05,
            zero_pad: 8,
            taper: Taper::Rectangular,
            closeness: 0.15,
            balance: 0.75,
            a_list: vec![5.0, 10.0, 15.0],
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Config {
        line,
        message: format!("invalid value for `{key}`: `{value}` is not a number"),
    })
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::Config {
        line,
        message: format!("invalid value for `{key}`: `{value}` is not a nonnegative integer"),
    })
}

fn parse_f64_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| Error::Config {
                line,
                message: format!(
                    "invalid value for `{key}`: `{}` is not a number",
                    part.trim()
                ),
            })
        })
        .collect()
}

/// Parse a config from `key = value` text. Blank lines and lines starting
/// with `#` are skipped; keys may appear at most once; unknown keys and
/// malformed values are reported with their 1-based line number.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key_raw, value_raw)) = trimmed.split_once('=') else {
            return Err(Error::Config {
                line,
                message: format!("expected `key = value`, got `{trimmed}`"),
            });
        };
        let key = key_raw.trim();
        let value = value_raw.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        match key {
            "d" => cfg.d_zfs = parse_f64(key, value, line)?,
            "g_e" => cfg.g_e = parse_f64(key, value, line)?,
            "mu_b" => cfg.mu_b = parse_f64(key, value, line)?,
            "b_mt" => cfg.b_mt = Some(parse_f64(key, value, line)?),
            "a" => cfg.a = Some(parse_f64(key, value, line)?),
            "omega_field" => cfg.omega_field = parse_f64(key, value, line)?,
            "delta" => cfg.delta = parse_f64(key, value, line)?,
            "initial" => {
                let parts = parse_f64_list(key, value, line)?;
                if parts.len() != 6 {
                    return Err(Error::Config {
                        line,
                        message: format!(
                            "invalid value for `initial`: need 6 comma-separated numbers \
                             (re/im pairs), got {}",
                            parts.len()
                        ),
                    });
                }
                cfg.initial.copy_from_slice(&parts);
            }
            "frame" => {
                cfg.frame = value.parse::<Frame>().map_err(|e| Error::Config {
                    line,
                    message: format!("invalid value for `frame`: {e}"),
                })?
            }
            "t_max" => cfg.t_max = parse_f64(key, value, line)?,
            "dt" => cfg.dt = parse_f64(key, value, line)?,
            "delta_lo" => cfg.delta_lo = parse_f64(key, value, line)?,
            "delta_hi" => cfg.delta_hi = parse_f64(key, value, line)?,
            "delta_steps" => cfg.delta_steps = parse_usize(key, value, line)?,
            "t_fixed" => cfg.t_fixed = parse_f64(key, value, line)?,
            "window_lo" => cfg.window_lo = parse_f64(key, value, line)?,
            "window_hi" => cfg.window_hi = parse_f64(key, value, line)?,
            "fit_dt" => cfg.fit_dt = parse_f64(key, value, line)?,
            "zero_pad" => cfg.zero_pad = parse_usize(key, value, line)?,
            "taper" => {
                cfg.taper = value.parse::<Taper>().map_err(|e| Error::Config {
                    line,
                    message: format!("invalid value for `taper`: {e}"),
                })?
            }
            "closeness" => cfg.closeness = parse_f64(key, value, line)?,
            "balance" => cfg.balance = parse_f64(key, value, line)?,
            "a_list" => cfg.a_list = parse_f64_list(key, value, line)?,
            "output" => cfg.output = Some(PathBuf::from(value)),
            "format" => {
                cfg.format = value.parse::<OutputFormat>().map_err(|e| Error::Config {
                    line,
                    message: format!("invalid value for `format`: {e}"),
                })?
            }
            other => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{other}`"),
                });
            }
        }
    }
    Ok(cfg)
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text)
}

impl RunConfig {
    /// Check every cross-field constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::InvalidConfig(msg))
        }
        if !self.d_zfs.is_finite() || self.d_zfs < 0.0 {
            return bad(format!("d must be finite and nonnegative, got {}", self.d_zfs));
        }
        if !self.g_e.is_finite() || self.g_e <= 0.0 {
            return bad(format!("g_e must be finite and positive, got {}", self.g_e));
        }
        if !self.mu_b.is_finite() || self.mu_b <= 0.0 {
            return bad(format!("mu_b must be finite and positive, got {}", self.mu_b));
        }
        if self.a.is_some() && self.b_mt.is_some() {
            return bad("a and b_mt are mutually exclusive; set at most one".into());
        }
        if let Some(b) = self.b_mt {
            if !b.is_finite() || b < 0.0 {
                return bad(format!("b_mt must be finite and nonnegative, got {b}"));
            }
        }
        if let Some(a) = self.a {
            if !a.is_finite() || a < 0.0 {
                return bad(format!("a must be finite and nonnegative, got {a}"));
            }
        }
        if !self.omega_field.is_finite() {
            return bad(format!("omega_field must be finite, got {}", self.omega_field));
        }
        if !self.delta.is_finite() {
            return bad(format!("delta must be finite, got {}", self.delta));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.t_max.is_finite() || self.t_max < self.dt {
            return bad(format!(
                "t_max must be at least dt = {}, got {}",
                self.dt, self.t_max
            ));
        }
        if !self.delta_lo.is_finite() || !self.delta_hi.is_finite() || self.delta_hi < self.delta_lo
        {
            return bad(format!(
                "delta_lo..delta_hi must be a finite nondecreasing range, got {}..{}",
                self.delta_lo, self.delta_hi
            ));
        }
        if self.delta_steps < 1 {
            return bad("delta_steps must be at least 1".into());
        }
        if !self.t_fixed.is_finite() || self.t_fixed < 0.0 {
            return bad(format!("t_fixed must be finite and nonnegative, got {}", self.t_fixed));
        }
        if !self.window_lo.is_finite()
            || !self.window_hi.is_finite()
            || self.window_hi <= self.window_lo
        {
            return bad(format!(
                "window_lo..window_hi must be a finite increasing range, got {}..{}",
                self.window_lo, self.window_hi
            ));
        }
        if !self.fit_dt.is_finite() || self.fit_dt <= 0.0 {
            return bad(format!("fit_dt must be positive, got {}", self.fit_dt));
        }
        if self.zero_pad < 1 {
            return bad("zero_pad must be at least 1".into());
        }
        if !(self.closeness > 0.0 && self.closeness < 1.0) {
            return bad(format!(
                "closeness must lie strictly in (0, 1), got {}",
                self.closeness
            ));
        }
        if !(self.balance > 0.0 && self.balance < 1.0) {
            return bad(format!(
                "balance must lie strictly in (0, 1), got {}",
                self.balance
            ));
        }
        if self.a_list.is_empty() {
            return bad("a_list must not be empty".into());
        }
        if self.a_list.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return bad("a_list entries must be finite and positive".into());
        }
        if self.initial.iter().any(|x| !x.is_finite()) {
            return bad("initial amplitudes must be finite".into());
        }
        if self.initial.iter().all(|x| *x == 0.0) {
            return bad("initial amplitudes must not all vanish".into());
        }
        Ok(())
    }

    /// The coupling in effect: `a` when set, derived from `b_mt` when that
    /// is set, otherwise the default 10.
    pub fn effective_a(&self) -> f64 {
        if let Some(a) = self.a {
            a
        } else if let Some(b) = self.b_mt {
            self.g_e * self.mu_b * b / (1000.0 * SQRT_2)
        } else {
            10.0
        }
    }

    /// Model parameters realized by this configuration.
    pub fn params(&self) -> Result<ModelParams> {
        let b_field = match self.b_mt {
            Some(b) => b,
            None => self.effective_a() * 1000.0 * SQRT_2 / (self.g_e * self.mu_b),
        };
        ModelParams::new(
            self.d_zfs,
            self.g_e,
            self.mu_b,
            b_field,
            self.omega_field,
            self.omega_field + self.delta,
        )
    }

    /// Normalized initial state at t = 0 (where the frames coincide).
    pub fn initial_state(&self) -> Result<StateVector> {
        let [re1, im1, re0, im0, rem, imm] = self.initial;
        StateVector::normalized(
            [
                crate::linalg::C64::new(re1, im1),
                crate::linalg::C64::new(re0, im0),
                crate::linalg::C64::new(rem, imm),
            ],
            Frame::Rotating,
            0.0,
        )
    }

    /// Canonical `key = value` rendering: fixed key order, shortest
    /// round-trip float formatting, coupling given as `a` unless the field
    /// was specified directly as `b_mt`. Feeding the dump back through
    /// [`parse_config_text`] reproduces the dump byte for byte.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("d", self.d_zfs.to_string());
        kv("g_e", self.g_e.to_string());
        kv("mu_b", self.mu_b.to_string());
        match self.b_mt {
            Some(b) => kv("b_mt", b.to_string()),
            None => kv("a", self.effective_a().to_string()),
        }
        kv("omega_field", self.omega_field.to_string());
        kv("delta", self.delta.to_string());
        kv(
            "initial",
            self.initial
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("frame", self.frame.to_string());
        kv("t_max", self.t_max.to_string());
        kv("dt", self.dt.to_string());
        kv("delta_lo", self.delta_lo.to_string());
        kv("delta_hi", self.delta_hi.to_string());
        kv("delta_steps", self.delta_steps.to_string());
        kv("t_fixed", self.t_fixed.to_string());
        kv("window_lo", self.window_lo.to_string());
        kv("window_hi", self.window_hi.to_string());
        kv("fit_dt", self.fit_dt.to_string());
        kv("zero_pad", self.zero_pad.to_string());
        kv("taper", self.taper.to_string());
        kv("closeness", self.closeness.to_string());
        kv("balance", self.balance.to_string());
        kv(
            "a_list",
            self.a_list
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        if let Some(path) = &self.output {
            kv("output", path.display().to_string());
        }
        kv("format", self.format.to_string());
        out
    }
}
