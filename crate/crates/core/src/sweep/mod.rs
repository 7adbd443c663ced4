//! Parameter and time sweeps with CSV output.
//!
//! A [`SweepSpec`] fixes a parameter set, one swept axis and one quantity.
//! Rows are evaluated in parallel and always emitted in axis order. A row
//! whose evaluation fails carries the error code in its `status` column and
//! leaves the observable columns empty.

mod preset;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric_phase::{geometric_phase, DEFAULT_QUAD_TOL};
use crate::non_markov::{blp_measure, BlpOptions};
use crate::params::SystemParams;
use crate::state::{coherence_l1, evolve_superposition, trace_distance};
use crate::temporal::{leggett_garg, quantum_witness, upper_envelope, C3_BOUND, C4_BOUND};

pub use preset::{
    figure_preset, run_preset, Curve, Manifest, Panel, PanelReport, Preset, PRESET_NAMES,
};

/// Version tag written in the leading comment line of every CSV.
pub const SCHEMA_VERSION: u32 = 1;

/// Default scan density for BLP rows.
pub const DEFAULT_BLP_POINTS_PER_UNIT: f64 = 4000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Amplitude,
    DecayRate,
    Coherence,
    Lgi3,
    Lgi4,
    Witness,
    Gp,
    Blp,
    TraceDistance,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::Amplitude,
        Quantity::DecayRate,
        Quantity::Coherence,
        Quantity::Lgi3,
        Quantity::Lgi4,
        Quantity::Witness,
        Quantity::Gp,
        Quantity::Blp,
        Quantity::TraceDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Amplitude => "amplitude",
            Quantity::DecayRate => "decay_rate",
            Quantity::Coherence => "coherence",
            Quantity::Lgi3 => "lgi3",
            Quantity::Lgi4 => "lgi4",
            Quantity::Witness => "witness",
            Quantity::Gp => "gp",
            Quantity::Blp => "blp",
            Quantity::TraceDistance => "trace_distance",
        }
    }

    /// Observable columns, in CSV order. The first one is summarized.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Quantity::Amplitude => &["abs_a", "re_a", "im_a"],
            Quantity::DecayRate => &["rate"],
            Quantity::Coherence => &["c_l1"],
            Quantity::Lgi3 => &["c3", "violated"],
            Quantity::Lgi4 => &["c4", "violated"],
            Quantity::Witness => &["w_q", "envelope"],
            Quantity::Gp => &["phi_g", "error_estimate", "degenerate"],
            Quantity::Blp => &[
                "n",
                "n_grid",
                "best_alpha",
                "t_max",
                "truncated",
                "tail_bound",
                "intervals",
            ],
            Quantity::TraceDistance => &["d"],
        }
    }

    /// Axes on which the quantity can be swept.
    pub fn allowed_axes(self) -> &'static [AxisKind] {
        use AxisKind::*;
        match self {
            Quantity::Amplitude
            | Quantity::DecayRate
            | Quantity::Coherence
            | Quantity::TraceDistance => &[Time],
            Quantity::Lgi3 | Quantity::Lgi4 | Quantity::Witness => &[Tau],
            Quantity::Gp | Quantity::Blp => &[LambdaRatio, Omega, Delta, Theta],
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown quantity `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Time,
    Tau,
    LambdaRatio,
    Omega,
    Delta,
    Theta,
}

impl AxisKind {
    pub const ALL: [AxisKind; 6] = [
        AxisKind::Time,
        AxisKind::Tau,
        AxisKind::LambdaRatio,
        AxisKind::Omega,
        AxisKind::Delta,
        AxisKind::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Time => "time",
            AxisKind::Tau => "tau",
            AxisKind::LambdaRatio => "lambda_ratio",
            AxisKind::Omega => "omega",
            AxisKind::Delta => "delta",
            AxisKind::Theta => "theta",
        }
    }

    /// Parameter set for one axis point.
    fn apply(self, fixed: &SystemParams, x: f64) -> SystemParams {
        let mut p = *fixed;
        match self {
            AxisKind::Time | AxisKind::Tau => {}
            AxisKind::LambdaRatio => p.lambda = x * p.gamma,
            AxisKind::Omega => p.omega_rabi = x,
            AxisKind::Delta => p.delta_qc = x,
            AxisKind::Theta => p.theta = x,
        }
        p
    }
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AxisKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown axis `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::InvalidSweep(format!("unknown spacing `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(kind: AxisKind, min: f64, max: f64, count: usize) -> Self {
        Self {
            kind,
            min,
            max,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(kind: AxisKind, min: f64, max: f64, count: usize) -> Self {
        Self {
            kind,
            min,
            max,
            count,
            spacing: Spacing::Log,
        }
    }

    /// Grid points; the endpoints are exactly `min` and `max`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let w = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + w * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + w * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

fn default_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

fn default_points_per_unit() -> f64 {
    DEFAULT_BLP_POINTS_PER_UNIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub axis: Axis,
    pub params: SystemParams,
    /// Absolute quadrature tolerance for the geometric phase.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// BLP horizon; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// BLP scan density.
    #[serde(default = "default_points_per_unit")]
    pub blp_points_per_unit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(quantity: Quantity, axis: Axis, params: SystemParams) -> Self {
        Self {
            quantity,
            axis,
            params,
            tol: DEFAULT_QUAD_TOL,
            t_max: None,
            blp_points_per_unit: DEFAULT_BLP_POINTS_PER_UNIT,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSweep(msg));
        let a = &self.axis;
        if !self.quantity.allowed_axes().contains(&a.kind) {
            return bad(format!(
                "quantity `{}` cannot be swept along `{}`",
                self.quantity, a.kind
            ));
        }
        if a.count < 2 {
            return bad(format!("axis needs at least 2 points, got {}", a.count));
        }
        if !(a.min.is_finite() && a.max.is_finite()) || a.min >= a.max {
            return bad(format!(
                "axis range requires min < max, got [{}, {}]",
                a.min, a.max
            ));
        }
        if a.spacing == Spacing::Log && a.min <= 0.0 {
            return bad(format!("log spacing requires min > 0, got {}", a.min));
        }
        let lower = match a.kind {
            AxisKind::Time | AxisKind::Tau | AxisKind::Omega | AxisKind::Theta => Some(0.0),
            AxisKind::LambdaRatio => None,
            AxisKind::Delta => Some(f64::NEG_INFINITY),
        };
        match lower {
            Some(lo) if a.min < lo => {
                return bad(format!("{} axis must be >= {lo}, got {}", a.kind, a.min))
            }
            None if a.min <= 0.0 => {
                return bad(format!("{} axis must be > 0, got {}", a.kind, a.min))
            }
            _ => {}
        }
        if a.kind == AxisKind::Theta && a.max > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return bad(format!(
                "theta axis must end at or below pi/2, got {}",
                a.max
            ));
        }
        self.params
            .validate()
            .map_err(|e| Error::InvalidSweep(e.to_string()))?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("t_max must be > 0, got {t}"));
            }
        }
        if !(self.blp_points_per_unit > 0.0 && self.blp_points_per_unit.is_finite()) {
            return bad(format!(
                "blp_points_per_unit must be > 0, got {}",
                self.blp_points_per_unit
            ));
        }
        Ok(())
    }

    fn blp_options(&self) -> BlpOptions {
        BlpOptions {
            t_max: self.t_max,
            points_per_unit: self.blp_points_per_unit,
            ..BlpOptions::default()
        }
    }
}

/// One cell of an observable column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Float(f64),
    Count(usize),
    Flag(bool),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Float(v) => v,
            Value::Count(n) => n as f64,
            Value::Flag(b) => f64::from(u8::from(b)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{}", format_float(*v)),
            Value::Count(n) => write!(f, "{n}"),
            Value::Flag(b) => write!(f, "{}", u8::from(*b)),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed { code: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub axis_value: f64,
    pub params: SystemParams,
    pub status: RowStatus,
    /// Observable values; empty for failed rows.
    pub values: Vec<Value>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    /// Value of the first observable column.
    pub fn primary(&self) -> Option<f64> {
        self.values.first().map(|v| v.as_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub observable: &'static str,
    pub rows: usize,
    pub error_rows: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Axis value at the maximum.
    pub argmax: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

impl SweepOutput {
    /// Primary observable of the successful rows as `(axis, value)` pairs.
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.primary().map(|v| (r.axis_value, v)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut sink = CsvSink::new(out, self.spec.quantity, self.spec.axis.kind, None)?;
        sink.append(self, None)?;
        sink.finish()
    }

    /// Writes to `spec.output` when set.
    pub fn write_to_output(&self) -> Result<Option<PathBuf>> {
        let Some(path) = &self.spec.output else {
            return Ok(None);
        };
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        Ok(Some(path.clone()))
    }
}

fn evaluate(spec: &SweepSpec, x: f64) -> Result<Vec<Value>> {
    let p = spec.axis.kind.apply(&spec.params, x);
    let dp = p.derive()?;
    let theta = p.theta;
    let v = match spec.quantity {
        Quantity::Amplitude => {
            let a = dp.amplitude(x);
            vec![
                Value::Float(a.norm()),
                Value::Float(a.re),
                Value::Float(a.im),
            ]
        }
        Quantity::DecayRate => vec![Value::Float(dp.decay_rate(x)?)],
        Quantity::Coherence => vec![Value::Float(coherence_l1(&evolve_superposition(
            &dp, theta, x,
        )))],
        Quantity::Lgi3 => {
            let r = leggett_garg(&dp, theta, x)?;
            vec![Value::Float(r.c3), Value::Flag(r.c3 > C3_BOUND)]
        }
        Quantity::Lgi4 => {
            let r = leggett_garg(&dp, theta, x)?;
            vec![Value::Float(r.c4), Value::Flag(r.c4 > C4_BOUND)]
        }
        Quantity::Witness => {
            // The envelope needs the whole series and is filled in afterwards.
            vec![
                Value::Float(quantum_witness(&dp, theta, x)?),
                Value::Float(0.0),
            ]
        }
        Quantity::Gp => {
            let g = geometric_phase(&dp, theta, spec.tol)?;
            vec![
                Value::Float(g.phi_g),
                Value::Float(g.error_estimate),
                Value::Flag(g.degenerate),
            ]
        }
        Quantity::Blp => {
            let r = blp_measure(&p, &spec.blp_options())?;
            vec![
                Value::Float(r.n_measure),
                Value::Float(r.grid_n_measure),
                Value::Float(r.best_alpha),
                Value::Float(r.t_max),
                Value::Flag(r.truncated),
                Value::Float(r.tail_bound),
                Value::Count(r.interval_count),
            ]
        }
        Quantity::TraceDistance => {
            // Orthogonal pair: the superposition at theta and at theta + pi/2.
            let (s, c) = theta.sin_cos();
            let s1 = evolve_superposition(&dp, theta, x);
            let other = crate::state::QubitState::from_parts(
                s * s,
                num_complex::Complex64::new(-c * s, 0.0),
            );
            let s2 = crate::state::apply_channel(&dp, &other, x)?;
            vec![Value::Float(trace_distance(&s1, &s2))]
        }
    };
    Ok(v)
}

fn fill_witness_envelope(spec: &SweepSpec, records: &mut [SweepRecord]) -> Result<()> {
    let dp = spec.params.derive()?;
    let scale = (2.0 * spec.params.theta).sin().abs();
    let xs: Vec<f64> = records.iter().map(|r| r.axis_value).collect();
    let half: Vec<f64> = xs.iter().map(|&t| 0.5 * dp.amplitude(t).norm()).collect();
    let env = upper_envelope(&xs, &half);
    for (r, e) in records.iter_mut().zip(env) {
        if r.is_ok() {
            r.values[1] = Value::Float(scale * e);
        }
    }
    Ok(())
}

fn summarize(quantity: Quantity, records: &[SweepRecord]) -> SweepSummary {
    let mut min: Option<f64> = None;
    let mut max: Option<(f64, f64)> = None;
    for r in records {
        if let Some(v) = r.primary() {
            min = Some(min.map_or(v, |m| m.min(v)));
            if max.is_none_or(|(m, _)| v > m) {
                max = Some((v, r.axis_value));
            }
        }
    }
    SweepSummary {
        observable: quantity.columns()[0],
        rows: records.len(),
        error_rows: records.iter().filter(|r| !r.is_ok()).count(),
        min,
        max: max.map(|m| m.0),
        argmax: max.map(|m| m.1),
    }
}

/// Evaluates every axis point. Fails only for an invalid spec; numerical
/// failures become error rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let points = spec.axis.points();
    let mut records: Vec<SweepRecord> = points
        .par_iter()
        .map(|&x| {
            let params = spec.axis.kind.apply(&spec.params, x);
            match evaluate(spec, x) {
                Ok(values) => SweepRecord {
                    axis_value: x,
                    params,
                    status: RowStatus::Ok,
                    values,
                },
                Err(e) => SweepRecord {
                    axis_value: x,
                    params,
                    status: RowStatus::Failed {
                        code: e.code(),
                        message: e.to_string(),
                    },
                    values: Vec::new(),
                },
            }
        })
        .collect();
    if spec.quantity == Quantity::Witness {
        fill_witness_envelope(spec, &mut records)?;
    }
    let summary = summarize(spec.quantity, &records);
    Ok(SweepOutput {
        spec: spec.clone(),
        records,
        summary,
    })
}

/// Column names for a quantity, optionally prefixed by a curve key column.
pub fn header(quantity: Quantity, curve_key: Option<&str>) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    if let Some(k) = curve_key {
        cols.push(format!("curve_{k}"));
    }
    for c in [
        "status",
        "message",
        "axis",
        "gamma",
        "lambda",
        "omega",
        "delta",
        "delta_cav",
        "theta",
    ] {
        cols.push(c.to_string());
    }
    cols.extend(quantity.columns().iter().map(|c| c.to_string()));
    cols
}

/// Leading comment line of a CSV file.
pub fn schema_line(quantity: Quantity, axis: AxisKind, curve_key: Option<&str>) -> String {
    let mut s = format!("# qcavity-sweep schema={SCHEMA_VERSION} quantity={quantity} axis={axis}");
    if let Some(k) = curve_key {
        s.push_str(&format!(" curve={k}"));
    }
    s
}

/// Incremental CSV writer: one schema line, one header, then rows from any
/// number of sweeps of the same quantity.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    quantity: Quantity,
    width: usize,
}

impl<W: Write> CsvSink<W> {
    pub fn new(
        mut out: W,
        quantity: Quantity,
        axis: AxisKind,
        curve_key: Option<&str>,
    ) -> Result<Self> {
        writeln!(out, "{}", schema_line(quantity, axis, curve_key))?;
        let mut writer = csv::Writer::from_writer(out);
        let head = header(quantity, curve_key);
        writer.write_record(&head)?;
        Ok(Self {
            writer,
            quantity,
            width: head.len(),
        })
    }

    pub fn append(&mut self, output: &SweepOutput, curve_value: Option<f64>) -> Result<()> {
        if output.spec.quantity != self.quantity {
            return Err(Error::InvalidSweep(format!(
                "cannot mix `{}` rows into a `{}` file",
                output.spec.quantity, self.quantity
            )));
        }
        let n_obs = self.quantity.columns().len();
        for r in &output.records {
            let mut row: Vec<String> = Vec::with_capacity(self.width);
            if let Some(c) = curve_value {
                row.push(format_float(c));
            }
            let (status, message) = match &r.status {
                RowStatus::Ok => ("ok".to_string(), String::new()),
                RowStatus::Failed { code, message } => (code.to_string(), message.clone()),
            };
            row.push(status);
            row.push(message);
            let p = &r.params;
            for v in [
                r.axis_value,
                p.gamma,
                p.lambda,
                p.omega_rabi,
                p.delta_qc,
                p.delta_cav,
                p.theta,
            ] {
                row.push(format_float(v));
            }
            if r.is_ok() {
                row.extend(r.values.iter().map(|v| v.to_string()));
            } else {
                row.extend(std::iter::repeat_n(String::new(), n_obs));
            }
            debug_assert_eq!(row.len(), self.width);
            self.writer.write_record(&row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}
