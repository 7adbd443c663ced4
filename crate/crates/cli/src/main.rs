use std::f64::consts::FRAC_PI_2;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qcavity::sweep::{figure_preset, run_preset, Manifest, Preset, RowStatus};
use qcavity::{
    oracle_max_deviation, run_sweep, Axis, AxisKind, Error, Quantity, Spacing, SweepSpec,
    SystemParams,
};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

/// Oracle check grid: cavity widths, Rabi frequencies and detunings.
const CHECK_LAMBDAS: [f64; 3] = [0.01, 0.1, 1.0];
const CHECK_OMEGAS: [f64; 3] = [0.0, 0.5, 2.0];
const CHECK_DELTAS: [f64; 3] = [0.0, 1.0, 10.0];
const CHECK_BOUND: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "qcavity",
    version,
    about = "Driven qubit in a lossy Lorentzian cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep one quantity along one axis and write CSV.
    Sweep(SweepArgs),
    /// Reproduce a figure preset (CSV per panel plus a manifest).
    Figure(FigureArgs),
    /// Compare the closed-form amplitude with direct ODE integration.
    Check(CheckArgs),
    /// Print derived quantities for a parameter set.
    Params(ParamArgs),
}

/// System parameters, all in units of gamma.
#[derive(Debug, Clone, Default, Args)]
struct ParamFlags {
    /// Qubit decay rate (sets the unit; default 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Cavity spectral width.
    #[arg(long)]
    lambda: Option<f64>,
    /// Rabi frequency of the classical drive.
    #[arg(long)]
    omega: Option<f64>,
    /// Qubit-drive detuning.
    #[arg(long)]
    delta: Option<f64>,
    /// Qubit-cavity detuning.
    #[arg(long = "delta-cav")]
    delta_cav: Option<f64>,
    /// Initial-state angle in radians, in [0, pi/2].
    #[arg(long)]
    theta: Option<f64>,
    /// Flat TOML file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// amplitude, decay_rate, coherence, lgi3, lgi4, witness, gp, blp or trace_distance.
    #[arg(long)]
    quantity: Option<String>,
    /// time, tau, lambda_ratio, omega, delta or theta.
    #[arg(long)]
    axis: Option<String>,
    /// First axis value.
    #[arg(long)]
    min: Option<f64>,
    /// Last axis value.
    #[arg(long)]
    max: Option<f64>,
    /// Number of axis points.
    #[arg(long)]
    points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    spacing: Option<String>,
    /// End of a time or tau axis when --max is absent; BLP horizon.
    #[arg(long)]
    tmax: Option<f64>,
    /// Geometric-phase quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// BLP scan points per unit of the fastest rate times t_max.
    #[arg(long = "blp-density")]
    blp_density: Option<f64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// fig2 ... fig10.
    #[arg(long)]
    preset: Option<String>,
    /// Re-run the sweeps listed in a manifest instead of a named preset.
    #[arg(long, conflicts_with = "preset")]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat TOML file supplying preset and out.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// ODE tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Samples per trajectory.
    #[arg(long)]
    points: Option<usize>,
    /// End of the compared time window.
    #[arg(long)]
    tmax: Option<f64>,
    /// Flat TOML file supplying tmax.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[command(flatten)]
    params: ParamFlags,
}

/// Keys accepted in a config file; each mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    gamma: Option<f64>,
    lambda: Option<f64>,
    omega: Option<f64>,
    delta: Option<f64>,
    delta_cav: Option<f64>,
    theta: Option<f64>,
    quantity: Option<String>,
    axis: Option<String>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    spacing: Option<String>,
    tmax: Option<f64>,
    tol: Option<f64>,
    blp_density: Option<f64>,
    out: Option<PathBuf>,
    preset: Option<String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Usage)?;
        toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(Failure::Usage)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::InvalidSweep(_)
            | Error::UnknownPreset(_)
            | Error::InvalidGrid(_)
            | Error::InvalidState(_)
            | Error::Io(_) => Failure::Usage(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn system_params(flags: &ParamFlags, cfg: &ConfigFile) -> Result<SystemParams, Failure> {
    let d = SystemParams::default();
    let p = SystemParams {
        gamma: flags.gamma.or(cfg.gamma).unwrap_or(d.gamma),
        lambda: flags.lambda.or(cfg.lambda).unwrap_or(d.lambda),
        omega_rabi: flags.omega.or(cfg.omega).unwrap_or(d.omega_rabi),
        delta_qc: flags.delta.or(cfg.delta).unwrap_or(d.delta_qc),
        delta_cav: flags.delta_cav.or(cfg.delta_cav).unwrap_or(d.delta_cav),
        theta: flags.theta.or(cfg.theta).unwrap_or(d.theta),
    };
    p.validate()?;
    Ok(p)
}

fn default_range(kind: AxisKind) -> (f64, f64, Spacing) {
    match kind {
        AxisKind::Time | AxisKind::Tau => (0.0, 30.0, Spacing::Linear),
        AxisKind::LambdaRatio => (0.01, 10.0, Spacing::Log),
        AxisKind::Omega => (0.0, 2.0, Spacing::Linear),
        AxisKind::Delta => (0.0, 10.0, Spacing::Linear),
        AxisKind::Theta => (0.0, FRAC_PI_2, Spacing::Linear),
    }
}

fn build_spec(args: &SweepArgs) -> Result<SweepSpec, Failure> {
    let cfg = ConfigFile::load(args.params.config.as_deref())?;
    let params = system_params(&args.params, &cfg)?;
    let quantity: Quantity = args
        .quantity
        .clone()
        .or(cfg.quantity.clone())
        .ok_or_else(|| usage("--quantity is required"))?
        .parse()?;
    let kind: AxisKind = match args.axis.clone().or(cfg.axis.clone()) {
        Some(a) => a.parse()?,
        None => quantity.allowed_axes()[0],
    };
    let (lo, hi, default_spacing) = default_range(kind);
    let tmax = args.tmax.or(cfg.tmax);
    let time_like = matches!(kind, AxisKind::Time | AxisKind::Tau);
    let max = args
        .max
        .or(cfg.max)
        .or(if time_like { tmax } else { None })
        .unwrap_or(hi);
    let spacing = match args.spacing.clone().or(cfg.spacing.clone()) {
        Some(s) => s.parse()?,
        None => default_spacing,
    };
    let axis = Axis {
        kind,
        min: args.min.or(cfg.min).unwrap_or(lo),
        max,
        count: args.points.or(cfg.points).unwrap_or(200),
        spacing,
    };
    let mut spec = SweepSpec::new(quantity, axis, params);
    if let Some(tol) = args.tol.or(cfg.tol) {
        spec.tol = tol;
    }
    if quantity == Quantity::Blp {
        spec.t_max = tmax;
    }
    if let Some(d) = args.blp_density.or(cfg.blp_density) {
        spec.blp_points_per_unit = d;
    }
    spec.output = args.out.clone().or(cfg.out.clone());
    spec.validate()?;
    Ok(spec)
}

fn warn_params(p: &SystemParams) {
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let spec = build_spec(args)?;
    warn_params(&spec.params);
    let out = run_sweep(&spec)?;
    match &spec.output {
        Some(path) => {
            out.write_to_output()?;
            eprintln!("wrote {}", path.display());
        }
        None => out.write_csv(BufWriter::new(io::stdout().lock()))?,
    }
    let s = &out.summary;
    let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.10e}"));
    eprintln!(
        "{} rows={} errors={} min={} max={} argmax={}",
        s.observable,
        s.rows,
        s.error_rows,
        fmt(s.min),
        fmt(s.max),
        fmt(s.argmax)
    );
    if s.error_rows > 0 {
        for r in out.records.iter().filter(|r| !r.is_ok()).take(5) {
            if let RowStatus::Failed { code, message } = &r.status {
                eprintln!("  failed at {}: {code}: {message}", r.axis_value);
            }
        }
        return Err(Failure::Numerical(anyhow!("{} rows failed", s.error_rows)));
    }
    Ok(())
}

fn cmd_figure(args: &FigureArgs) -> Result<(), Failure> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let preset: Preset = match (&args.manifest, args.preset.clone().or(cfg.preset.clone())) {
        (Some(path), _) => Manifest::read(path)?.preset,
        (None, Some(name)) => figure_preset(&name)?,
        (None, None) => return Err(usage("--preset or --manifest is required")),
    };
    let out_dir = args
        .out
        .clone()
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("figures"));
    let reports = run_preset(&preset, &out_dir)?;
    let mut errors = 0;
    for r in &reports {
        errors += r.error_rows();
        eprintln!("wrote {} ({} curves)", r.path.display(), r.outputs.len());
    }
    eprintln!("wrote {}", out_dir.join(preset.manifest_file()).display());
    if errors > 0 {
        return Err(Failure::Numerical(anyhow!("{errors} rows failed")));
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), Failure> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let tol = args.tol.or(cfg.tol).unwrap_or(1e-12);
    let points = args.points.or(cfg.points).unwrap_or(301);
    let t_max = args.tmax.or(cfg.tmax).unwrap_or(30.0);
    let mut stdout = io::stdout().lock();
    let mut worst: f64 = 0.0;
    writeln!(stdout, "lambda,omega,delta,max_error")?;
    for &l in &CHECK_LAMBDAS {
        for &o in &CHECK_OMEGAS {
            for &d in &CHECK_DELTAS {
                let err = oracle_max_deviation(&SystemParams::new(l, o, d), t_max, points, tol)?;
                worst = worst.max(err);
                writeln!(stdout, "{l},{o},{d},{err:.3e}")?;
            }
        }
    }
    let ok = worst <= CHECK_BOUND;
    eprintln!(
        "worst deviation {worst:.3e} (bound {CHECK_BOUND:e}): {}",
        if ok { "ok" } else { "FAILED" }
    );
    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow!(
            "closed form and ODE disagree by {worst:e}"
        )))
    }
}

fn cmd_params(args: &ParamArgs) -> Result<(), Failure> {
    let cfg = ConfigFile::load(args.params.config.as_deref())?;
    let p = system_params(&args.params, &cfg)?;
    warn_params(&p);
    let dp = p.derive()?;
    let sd = p.spectral_density();
    let mut out = io::stdout().lock();
    writeln!(out, "gamma = {}", p.gamma)?;
    writeln!(out, "lambda = {}", p.lambda)?;
    writeln!(out, "omega = {}", p.omega_rabi)?;
    writeln!(out, "delta = {}", p.delta_qc)?;
    writeln!(out, "delta_cav = {}", p.delta_cav)?;
    writeln!(out, "theta = {}", p.theta)?;
    writeln!(out, "eta = {}", dp.eta)?;
    writeln!(out, "omega_d = {}", dp.omega_d)?;
    writeln!(out, "m = {} {:+}i", dp.m_const.re, dp.m_const.im)?;
    writeln!(out, "f = {} {:+}i", dp.f_const.re, dp.f_const.im)?;
    writeln!(out, "coupling_factor = {}", dp.coupling_factor())?;
    writeln!(out, "tau_r = {}", dp.tau_r)?;
    writeln!(out, "tau_q = {}", dp.tau_q)?;
    match dp.period() {
        Some(t) => writeln!(out, "period = {t}")?,
        None => writeln!(out, "period = undefined")?,
    }
    writeln!(out, "spectral_weight = {}", sd.total_weight())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Check(a) => cmd_check(a),
        Command::Params(a) => cmd_params(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
