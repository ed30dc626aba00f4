//! Command-line interface: flag/config merging and the subcommand
//! implementations, all emitting deterministic text output.

use crate::analysis::{fit_quadratic, scaling_study, window_grid, FitResult};
use crate::config::{load_config, OutputFormat, RunConfig};
use crate::error::Result;
use crate::evolution::population_series;
use crate::linalg::linspace;
use crate::metrology::{qfi_delta_sweep, qfi_time_series};
use crate::model::{generator_m, Frame, ModelParams, StateVector};
use crate::spectrum::{
    analytic_spectrum, classify_beat, find_frequency_crossing, periodogram, sweep_spectrum,
    BeatReport, Spectrum, Taper,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Frame choice as a CLI value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    /// Co-rotating frame.
    Rotating,
    /// Laboratory frame.
    Lab,
}

impl From<FrameArg> for Frame {
    fn from(v: FrameArg) -> Frame {
        match v {
            FrameArg::Rotating => Frame::Rotating,
            FrameArg::Lab => Frame::Lab,
        }
    }
}

/// Periodogram taper as a CLI value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaperArg {
    /// No taper.
    Rectangular,
    /// Hann taper.
    Hann,
}

impl From<TaperArg> for Taper {
    fn from(v: TaperArg) -> Taper {
        match v {
            TaperArg::Rectangular => Taper::Rectangular,
            TaperArg::Hann => Taper::Hann,
        }
    }
}

/// Scalar-output encoding as a CLI value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// One-row CSV tables.
    Csv,
    /// JSON objects, one per line.
    KvJson,
}

impl From<FormatArg> for OutputFormat {
    fn from(v: FormatArg) -> OutputFormat {
        match v {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::KvJson => OutputFormat::KvJson,
        }
    }
}

/// Reference dataset selector for `reproduce`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    /// Beat-line sweep versus detuning.
    Fig1,
    /// Population traces in three oscillation regimes.
    Fig2,
    /// QFI growth curves and their quadratic fits versus coupling.
    Fig3,
    /// QFI versus detuning at fixed time, several couplings.
    Fig4,
    /// Every dataset.
    All,
}

/// Initial state given as six comma-separated re/im values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialArg(pub [f64; 6]);

fn parse_initial_arg(s: &str) -> std::result::Result<InitialArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 6 {
        return Err(format!(
            "need 6 comma-separated numbers (re/im pairs for |1>, |0>, |-1>), got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; 6];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", part.trim()))?;
    }
    Ok(InitialArg(out))
}

/// Coupling list given as comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct AListArg(pub Vec<f64>);

fn parse_a_list_arg(s: &str) -> std::result::Result<AListArg, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let trimmed = part.trim();
        out.push(
            trimmed
                .parse::<f64>()
                .map_err(|_| format!("`{trimmed}` is not a number"))?,
        );
    }
    Ok(AListArg(out))
}

/// Spin-1 rotating-frame simulator and rotation-rate metrology toolkit.
///
/// Settings resolve in three layers: built-in defaults, then the
/// `--config` file, then explicit flags. `--dump-config` prints the
/// resolved configuration instead of running the subcommand.
#[derive(Debug, Parser)]
#[command(name = "nvgyro", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Zero-field splitting.
    #[arg(long, global = true, value_name = "FREQ")]
    pub d: Option<f64>,

    /// Electron Lande factor.
    #[arg(long, global = true, value_name = "G")]
    pub g_e: Option<f64>,

    /// Bohr magneton in the per-mT unit.
    #[arg(long, global = true, value_name = "MU")]
    pub mu_b: Option<f64>,

    /// Magnetic field in mT (mutually exclusive with --a).
    #[arg(long, global = true, value_name = "MT")]
    pub b_mt: Option<f64>,

    /// Drive coupling (mutually exclusive with --b-mt).
    #[arg(long, global = true, value_name = "FREQ")]
    pub a: Option<f64>,

    /// Rotation rate of the transverse field.
    #[arg(long, global = true, value_name = "FREQ")]
    pub omega_field: Option<f64>,

    /// Detuning (mechanical minus field rotation rate).
    #[arg(long, global = true, value_name = "FREQ")]
    pub delta: Option<f64>,

    /// Initial amplitudes: re,im for |1>, |0>, |-1>.
    #[arg(long, global = true, value_name = "LIST", value_parser = parse_initial_arg)]
    pub initial: Option<InitialArg>,

    /// Frame for states and QFI.
    #[arg(long, global = true, value_enum, value_name = "FRAME")]
    pub frame: Option<FrameArg>,

    /// Simulation horizon in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub t_max: Option<f64>,

    /// Simulation sample spacing in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub dt: Option<f64>,

    /// Lower detuning of sweeps and of the crossing bracket.
    #[arg(long, global = true, value_name = "FREQ")]
    pub lo: Option<f64>,

    /// Upper detuning of sweeps and of the crossing bracket.
    #[arg(long, global = true, value_name = "FREQ")]
    pub hi: Option<f64>,

    /// Number of sweep grid points.
    #[arg(long, global = true, value_name = "N")]
    pub steps: Option<usize>,

    /// Fixed evaluation time for detuning sweeps, in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub t: Option<f64>,

    /// Fit window lower edge in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub window_lo: Option<f64>,

    /// Fit window upper edge in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub window_hi: Option<f64>,

    /// Sample spacing of fit grids in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub fit_dt: Option<f64>,

    /// Periodogram zero-padding factor.
    #[arg(long, global = true, value_name = "N")]
    pub zero_pad: Option<usize>,

    /// Periodogram taper.
    #[arg(long, global = true, value_enum, value_name = "TAPER")]
    pub taper: Option<TaperArg>,

    /// Relative gap under which two lines count as close.
    #[arg(long, global = true, value_name = "FRAC")]
    pub closeness: Option<f64>,

    /// Amplitude ratio above which a close pair counts as balanced.
    #[arg(long, global = true, value_name = "FRAC")]
    pub balance: Option<f64>,

    /// Couplings for the scaling study.
    #[arg(long, global = true, value_name = "LIST", value_parser = parse_a_list_arg)]
    pub a_list: Option<AListArg>,

    /// Output file (stdout when omitted).
    #[arg(short = 'o', long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Encoding for scalar results.
    #[arg(long, global = true, value_enum, value_name = "FMT")]
    pub format: Option<FormatArg>,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
}

/// Available subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population of |0> versus time as CSV (frame-independent).
    Simulate,
    /// Exact line content of the population signal, or its sampled
    /// periodogram.
    Spectrum {
        /// Emit the sampled periodogram instead of the exact lines.
        #[arg(long)]
        periodogram: bool,
    },
    /// Line content across the detuning grid (initial state fixed to |0>).
    SweepSpectrum,
    /// Detuning where two beat frequencies coincide, by bisection over
    /// [--lo, --hi].
    Crossing,
    /// Classify the oscillation regime at the configured detuning.
    Classify,
    /// QFI of the rotation-rate estimate versus time.
    Qfi,
    /// QFI versus detuning at the fixed time --t.
    QfiSweep,
    /// Quadratic fit of QFI(t) over the fit window.
    FitQfi,
    /// Quadratic QFI fits for each coupling in --a-list, with the
    /// coefficient-times-coupling-squared products.
    Scaling,
    /// Regenerate the reference datasets with pinned settings (model flags
    /// are ignored).
    Reproduce {
        /// Dataset to regenerate.
        #[arg(value_enum, default_value_t = ReproduceTarget::All)]
        target: ReproduceTarget,
        /// Directory the files are written into.
        #[arg(long, default_value = "out", value_name = "DIR")]
        out_dir: PathBuf,
    },
}

/// Resolve defaults, config file, and flags into one validated config.
fn merge(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.d {
        cfg.d_zfs = v;
    }
    if let Some(v) = cli.g_e {
        cfg.g_e = v;
    }
    if let Some(v) = cli.mu_b {
        cfg.mu_b = v;
    }
    // A coupling flag overrides and clears the other channel; both flags at
    // once fall through to validation, which rejects the combination.
    match (cli.a, cli.b_mt) {
        (Some(a), Some(b)) => {
            cfg.a = Some(a);
            cfg.b_mt = Some(b);
        }
        (Some(a), None) => {
            cfg.a = Some(a);
            cfg.b_mt = None;
        }
        (None, Some(b)) => {
            cfg.b_mt = Some(b);
            cfg.a = None;
        }
        (None, None) => {}
    }
    if let Some(v) = cli.omega_field {
        cfg.omega_field = v;
    }
    if let Some(v) = cli.delta {
        cfg.delta = v;
    }
    if let Some(v) = cli.initial {
        cfg.initial = v.0;
    }
    if let Some(v) = cli.frame {
        cfg.frame = v.into();
    }
    if let Some(v) = cli.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = cli.dt {
        cfg.dt = v;
    }
    if let Some(v) = cli.lo {
        cfg.delta_lo = v;
    }
    if let Some(v) = cli.hi {
        cfg.delta_hi = v;
    }
    if let Some(v) = cli.steps {
        cfg.delta_steps = v;
    }
    if let Some(v) = cli.t {
        cfg.t_fixed = v;
    }
    if let Some(v) = cli.window_lo {
        cfg.window_lo = v;
    }
    if let Some(v) = cli.window_hi {
        cfg.window_hi = v;
    }
    if let Some(v) = cli.fit_dt {
        cfg.fit_dt = v;
    }
    if let Some(v) = cli.zero_pad {
        cfg.zero_pad = v;
    }
    if let Some(v) = cli.taper {
        cfg.taper = v.into();
    }
    if let Some(v) = cli.closeness {
        cfg.closeness = v;
    }
    if let Some(v) = cli.balance {
        cfg.balance = v;
    }
    if let Some(v) = &cli.a_list {
        cfg.a_list = v.0.clone();
    }
    if let Some(v) = &cli.output {
        cfg.output = Some(v.clone());
    }
    if let Some(v) = cli.format {
        cfg.format = v.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Fixed-precision cell formatting: 13 significant digits, enough to
/// round-trip any value produced here.
fn cell(x: f64) -> String {
    format!("{x:.12e}")
}

fn simulate_csv(cfg: &RunConfig) -> Result<String> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let traj = population_series(&params, &initial, cfg.t_max, cfg.dt)?;
    let mut out = String::from("t_ns,p0\n");
    for (t, p) in traj.times.iter().zip(&traj.populations) {
        let _ = writeln!(out, "{},{}", cell(*t), cell(*p));
    }
    Ok(out)
}

fn spectrum_at(cfg: &RunConfig) -> Result<Spectrum> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let eig = crate::evolution::eigendecompose(&generator_m(&params), &initial)?;
    analytic_spectrum(&eig)
}

fn spectrum_csv(cfg: &RunConfig) -> Result<String> {
    let spec = spectrum_at(cfg)?;
    let mut out = String::from("omega,k,multiplicity\n");
    let _ = writeln!(out, "{},{},1", cell(0.0), cell(spec.k0));
    for line in &spec.lines {
        let _ = writeln!(
            out,
            "{},{},{}",
            cell(line.omega),
            cell(line.k),
            line.multiplicity
        );
    }
    Ok(out)
}

fn periodogram_csv(cfg: &RunConfig) -> Result<String> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let traj = population_series(&params, &initial, cfg.t_max, cfg.dt)?;
    let pg = periodogram(&traj, cfg.zero_pad, cfg.taper)?;
    let mut out = String::from("freq,magnitude\n");
    for (f, m) in pg.freqs.iter().zip(&pg.magnitudes) {
        let _ = writeln!(out, "{},{}", cell(*f), cell(*m));
    }
    Ok(out)
}

fn sweep_csv(cfg: &RunConfig) -> Result<String> {
    let template = cfg.params()?;
    let grid = linspace(cfg.delta_lo, cfg.delta_hi, cfg.delta_steps);
    let rows = sweep_spectrum(&template, &grid)?;
    let mut out = String::from("delta,omega1,omega2,omega3,k0,k1,k2,k3\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell(row.delta),
            cell(row.omegas[0]),
            cell(row.omegas[1]),
            cell(row.omegas[2]),
            cell(row.k0),
            cell(row.ks[0]),
            cell(row.ks[1]),
            cell(row.ks[2])
        );
    }
    Ok(out)
}

fn crossing_text(cfg: &RunConfig) -> Result<String> {
    let template = cfg.params()?;
    let root = find_frequency_crossing(&template, cfg.delta_lo, cfg.delta_hi)?;
    Ok(match cfg.format {
        OutputFormat::Csv => format!("delta_crossing\n{}\n", cell(root)),
        OutputFormat::KvJson => format!("{{\"delta_crossing\":{root}}}\n"),
    })
}

fn json_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => "null".into(),
    }
}

fn classify_text(cfg: &RunConfig) -> Result<String> {
    let spec = spectrum_at(cfg)?;
    let report: BeatReport = classify_beat(&spec, cfg.closeness, cfg.balance)?;
    Ok(match cfg.format {
        OutputFormat::Csv => {
            let opt = |x: Option<f64>| x.map(cell).unwrap_or_default();
            format!(
                "class,envelope_omega,modulation_ratio\n{},{},{}\n",
                report.class,
                opt(report.envelope_omega),
                opt(report.modulation_ratio)
            )
        }
        OutputFormat::KvJson => format!(
            "{{\"class\":\"{}\",\"envelope_omega\":{},\"modulation_ratio\":{}}}\n",
            report.class,
            json_opt(report.envelope_omega),
            json_opt(report.modulation_ratio)
        ),
    })
}

fn qfi_csv(cfg: &RunConfig) -> Result<String> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let times = window_grid(0.0, cfg.t_max, cfg.dt)?;
    let series = qfi_time_series(&params, &initial, &times, cfg.frame)?;
    let mut out = String::from("t_ns,qfi\n");
    for p in &series.points {
        let _ = writeln!(out, "{},{}", cell(p.t), cell(p.value));
    }
    Ok(out)
}

fn qfi_sweep_csv(cfg: &RunConfig) -> Result<String> {
    let template = cfg.params()?;
    let initial = cfg.initial_state()?;
    let grid = linspace(cfg.delta_lo, cfg.delta_hi, cfg.delta_steps);
    let series = qfi_delta_sweep(&template, &initial, cfg.t_fixed, &grid, cfg.frame)?;
    let mut out = String::from("delta,qfi\n");
    for p in &series.points {
        let _ = writeln!(out, "{},{}", cell(p.delta), cell(p.value));
    }
    Ok(out)
}

fn fit_qfi_at(cfg: &RunConfig) -> Result<FitResult> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let times = window_grid(cfg.window_lo, cfg.window_hi, cfg.fit_dt)?;
    let series = qfi_time_series(&params, &initial, &times, cfg.frame)?;
    let values: Vec<f64> = series.points.iter().map(|p| p.value).collect();
    let mut fit = fit_quadratic(&times, &values)?;
    fit.window = (cfg.window_lo, cfg.window_hi);
    Ok(fit)
}

fn fit_qfi_text(cfg: &RunConfig) -> Result<String> {
    let fit = fit_qfi_at(cfg)?;
    Ok(match cfg.format {
        OutputFormat::Csv => format!(
            "coeff_a,coeff_b,coeff_c,rms_residual,window_lo,window_hi\n{},{},{},{},{},{}\n",
            cell(fit.coeff_a),
            cell(fit.coeff_b),
            cell(fit.coeff_c),
            cell(fit.rms_residual),
            cell(fit.window.0),
            cell(fit.window.1)
        ),
        OutputFormat::KvJson => format!(
            "{{\"coeff_a\":{},\"coeff_b\":{},\"coeff_c\":{},\"rms_residual\":{},\
             \"window_lo\":{},\"window_hi\":{}}}\n",
            fit.coeff_a, fit.coeff_b, fit.coeff_c, fit.rms_residual, fit.window.0, fit.window.1
        ),
    })
}

fn scaling_text(cfg: &RunConfig) -> Result<String> {
    let template = cfg.params()?;
    let initial = cfg.initial_state()?;
    let rows = scaling_study(
        &template,
        &cfg.a_list,
        cfg.delta,
        (cfg.window_lo, cfg.window_hi),
        cfg.fit_dt,
        cfg.frame,
        &initial,
    )?;
    let mut out = String::new();
    match cfg.format {
        OutputFormat::Csv => {
            out.push_str("a,coeff_a,coeff_b,coeff_c,rms_residual,window_lo,window_hi,product\n");
            for row in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    cell(row.a_coupling),
                    cell(row.fit.coeff_a),
                    cell(row.fit.coeff_b),
                    cell(row.fit.coeff_c),
                    cell(row.fit.rms_residual),
                    cell(row.fit.window.0),
                    cell(row.fit.window.1),
                    cell(row.product)
                );
            }
        }
        OutputFormat::KvJson => {
            for row in rows {
                let _ = writeln!(
                    out,
                    "{{\"a\":{},\"coeff_a\":{},\"coeff_b\":{},\"coeff_c\":{},\
                     \"rms_residual\":{},\"window_lo\":{},\"window_hi\":{},\"product\":{}}}",
                    row.a_coupling,
                    row.fit.coeff_a,
                    row.fit.coeff_b,
                    row.fit.coeff_c,
                    row.fit.rms_residual,
                    row.fit.window.0,
                    row.fit.window.1,
                    row.product
                );
            }
        }
    }
    Ok(out)
}

/// Reference settings shared by the reproduce datasets.
const REF_D: f64 = 2.87;

fn reference_params(delta: f64, a: f64) -> Result<ModelParams> {
    ModelParams::from_delta_coupling(REF_D, delta, a)
}

fn reproduce_fig1(dir: &Path) -> Result<()> {
    let template = reference_params(0.0, 10.0)?;
    let grid = linspace(0.0, 50.0, 501);
    let rows = sweep_spectrum(&template, &grid)?;
    let mut out = String::new();
    out.push_str("# beat-line frequencies and amplitudes versus detuning\n");
    out.push_str("# settings: d = 2.87, a = 10, initial = |0>\n");
    out.push_str("# grid: delta from 0 to 50, 501 points\n");
    out.push_str("delta,omega1,omega2,omega3,k0,k1,k2,k3\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell(row.delta),
            cell(row.omegas[0]),
            cell(row.omegas[1]),
            cell(row.omegas[2]),
            cell(row.k0),
            cell(row.ks[0]),
            cell(row.ks[1]),
            cell(row.ks[2])
        );
    }
    std::fs::write(dir.join("fig1.csv"), out)?;
    Ok(())
}

fn reproduce_fig2(dir: &Path) -> Result<()> {
    let ket0 = StateVector::ket0(Frame::Rotating);
    for (label, delta) in [("d0", 0.0), ("d10p8", 10.8), ("d40", 40.0)] {
        let params = reference_params(delta, 10.0)?;
        let traj = population_series(&params, &ket0, 5.0, 0.001)?;
        let mut out = String::new();
        out.push_str("# population of |0> versus time\n");
        let _ = writeln!(out, "# settings: d = 2.87, a = 10, delta = {delta}, initial = |0>");
        out.push_str("# grid: t from 0 to 5 ns, dt = 0.001 ns\n");
        out.push_str("t_ns,p0\n");
        for (t, p) in traj.times.iter().zip(&traj.populations) {
            let _ = writeln!(out, "{},{}", cell(*t), cell(*p));
        }
        std::fs::write(dir.join(format!("fig2_{label}.csv")), out)?;
    }
    Ok(())
}

fn reproduce_fig3(dir: &Path) -> Result<()> {
    let ket0 = StateVector::ket0(Frame::Rotating);
    let couplings = [5.0, 10.0, 15.0];
    let times = window_grid(0.0, 30.0, 0.05)?;
    for &a in &couplings {
        let params = reference_params(20.0, a)?;
        let series = qfi_time_series(&params, &ket0, &times, Frame::Rotating)?;
        let mut out = String::new();
        out.push_str("# rotation-rate QFI versus time, co-rotating frame\n");
        let _ = writeln!(out, "# settings: d = 2.87, a = {a}, delta = 20, initial = |0>");
        out.push_str("# grid: t from 0 to 30 ns, dt = 0.05 ns\n");
        out.push_str("t_ns,qfi\n");
        for p in &series.points {
            let _ = writeln!(out, "{},{}", cell(p.t), cell(p.value));
        }
        std::fs::write(dir.join(format!("fig3_a{a}.csv")), out)?;
    }
    let template = reference_params(0.0, 10.0)?;
    let rows = scaling_study(
        &template,
        &couplings,
        20.0,
        (0.0, 30.0),
        0.05,
        Frame::Rotating,
        &ket0,
    )?;
    let mut out = String::new();
    out.push_str("# quadratic fits of QFI(t) over the window, per coupling\n");
    out.push_str("# settings: d = 2.87, delta = 20, co-rotating frame, initial = |0>\n");
    out.push_str("a,coeff_a,coeff_b,coeff_c,rms_residual,window_lo,window_hi\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            cell(row.a_coupling),
            cell(row.fit.coeff_a),
            cell(row.fit.coeff_b),
            cell(row.fit.coeff_c),
            cell(row.fit.rms_residual),
            cell(row.fit.window.0),
            cell(row.fit.window.1)
        );
    }
    std::fs::write(dir.join("fig3_fits.csv"), out)?;
    Ok(())
}

fn reproduce_fig4(dir: &Path) -> Result<()> {
    let ket0 = StateVector::ket0(Frame::Rotating);
    let grid = linspace(0.0, 50.0, 501);
    for a in [5.0, 10.0, 15.0, 20.0] {
        let template = reference_params(0.0, a)?;
        let series = qfi_delta_sweep(&template, &ket0, 10.0, &grid, Frame::Rotating)?;
        let mut out = String::new();
        out.push_str("# rotation-rate QFI versus detuning at fixed time\n");
        let _ = writeln!(
            out,
            "# settings: d = 2.87, a = {a}, t = 10 ns, co-rotating frame, initial = |0>"
        );
        out.push_str("# grid: delta from 0 to 50, 501 points\n");
        out.push_str("delta,qfi\n");
        for p in &series.points {
            let _ = writeln!(out, "{},{}", cell(p.delta), cell(p.value));
        }
        std::fs::write(dir.join(format!("fig4_a{a}.csv")), out)?;
    }
    Ok(())
}

fn reproduce(target: ReproduceTarget, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    match target {
        ReproduceTarget::Fig1 => reproduce_fig1(out_dir),
        ReproduceTarget::Fig2 => reproduce_fig2(out_dir),
        ReproduceTarget::Fig3 => reproduce_fig3(out_dir),
        ReproduceTarget::Fig4 => reproduce_fig4(out_dir),
        ReproduceTarget::All => {
            reproduce_fig1(out_dir)?;
            reproduce_fig2(out_dir)?;
            reproduce_fig3(out_dir)?;
            reproduce_fig4(out_dir)
        }
    }
}

/// Run a parsed invocation to completion. Errors are reported by the
/// binary with exit code 3; usage errors never reach this point (the
/// parser exits with code 2).
pub fn execute(cli: Cli) -> Result<()> {
    let cfg = merge(&cli)?;
    if cli.dump_config {
        return write_out(&cfg.output, &cfg.dump());
    }
    match cli.command {
        Command::Simulate => write_out(&cfg.output, &simulate_csv(&cfg)?),
        Command::Spectrum { periodogram: true } => write_out(&cfg.output, &periodogram_csv(&cfg)?),
        Command::Spectrum { periodogram: false } => write_out(&cfg.output, &spectrum_csv(&cfg)?),
        Command::SweepSpectrum => write_out(&cfg.output, &sweep_csv(&cfg)?),
        Command::Crossing => write_out(&cfg.output, &crossing_text(&cfg)?),
        Command::Classify => write_out(&cfg.output, &classify_text(&cfg)?),
        Command::Qfi => write_out(&cfg.output, &qfi_csv(&cfg)?),
        Command::QfiSweep => write_out(&cfg.output, &qfi_sweep_csv(&cfg)?),
        Command::FitQfi => write_out(&cfg.output, &fit_qfi_text(&cfg)?),
        Command::Scaling => write_out(&cfg.output, &scaling_text(&cfg)?),
        Command::Reproduce { target, out_dir } => reproduce(target, &out_dir),
    }
}
