//! Figure presets: curve families of sweeps written one CSV per panel, plus
//! a TOML manifest that lists every sweep so a run can be repeated or edited.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{run_sweep, Axis, AxisKind, CsvSink, Quantity, SweepOutput, SweepSpec, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const PRESET_NAMES: [&str; 9] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10",
];

const OMEGA_FAMILY: [f64; 5] = [0.0, 0.1, 0.5, 1.0, 2.0];
const DELTA_FAMILY: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
const STRONG_COUPLING: f64 = 0.01;
/// BLP scan density used by the presets.
const PRESET_BLP_DENSITY: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Value of the panel's curve parameter.
    pub value: f64,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    /// CSV file name, relative to the output directory.
    pub file: String,
    /// Parameter that distinguishes the curves (`omega`, `delta`, ...).
    pub curve_param: String,
    pub curves: Vec<Curve>,
}

impl Panel {
    fn quantity(&self) -> Result<Quantity> {
        let first = self
            .curves
            .first()
            .ok_or_else(|| Error::InvalidSweep(format!("panel `{}` has no curves", self.name)))?;
        let q = first.spec.quantity;
        let k = first.spec.axis.kind;
        if self
            .curves
            .iter()
            .any(|c| c.spec.quantity != q || c.spec.axis.kind != k)
        {
            return Err(Error::InvalidSweep(format!(
                "panel `{}` mixes quantities or axes",
                self.name
            )));
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub panels: Vec<Panel>,
}

impl Preset {
    pub fn specs(&self) -> Vec<SweepSpec> {
        self.panels
            .iter()
            .flat_map(|p| p.curves.iter().map(|c| c.spec.clone()))
            .collect()
    }

    pub fn manifest_file(&self) -> String {
        format!("{}_manifest.toml", self.name)
    }
}

/// On-disk manifest of a preset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub preset: Preset,
}

impl Manifest {
    pub fn new(preset: Preset) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            preset,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::InvalidSweep(e.to_string()))?;
        if m.schema != SCHEMA_VERSION {
            return Err(Error::InvalidSweep(format!(
                "manifest schema {} is not supported (expected {SCHEMA_VERSION})",
                m.schema
            )));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone)]
pub struct PanelReport {
    pub panel: String,
    pub path: PathBuf,
    pub curve_param: String,
    /// One sweep per curve, in manifest order.
    pub outputs: Vec<(f64, SweepOutput)>,
}

impl PanelReport {
    pub fn error_rows(&self) -> usize {
        self.outputs.iter().map(|(_, o)| o.summary.error_rows).sum()
    }
}

fn family(
    name: &str,
    curve_param: &str,
    values: &[f64],
    quantity: Quantity,
    axis: Axis,
    build: impl Fn(f64) -> SystemParams,
) -> Panel {
    let curves = values
        .iter()
        .map(|&v| {
            let mut spec = SweepSpec::new(quantity, axis, build(v));
            if quantity == Quantity::Blp {
                spec.blp_points_per_unit = PRESET_BLP_DENSITY;
            }
            Curve { value: v, spec }
        })
        .collect();
    Panel {
        name: name.to_string(),
        file: format!("{name}.csv"),
        curve_param: curve_param.to_string(),
        curves,
    }
}

fn params(lambda: f64, omega: f64, delta: f64, theta: f64) -> SystemParams {
    SystemParams::new(lambda, omega, delta).with_theta(theta)
}

/// Curve families for a named figure.
pub fn figure_preset(name: &str) -> Result<Preset> {
    let lam = STRONG_COUPLING;
    let tau_lgi = Axis::linear(AxisKind::Tau, 0.0, 4.0, 401);
    let lambda_axis = Axis::log(AxisKind::LambdaRatio, 0.01, 10.0, 61);
    let (description, panels) = match name {
        "fig2" => (
            "Leggett-Garg c3 and c4 versus tau for several Rabi frequencies",
            vec![
                family(
                    "fig2_c3",
                    "omega",
                    &OMEGA_FAMILY,
                    Quantity::Lgi3,
                    tau_lgi,
                    |o| params(lam, o, 0.0, 0.0),
                ),
                family(
                    "fig2_c4",
                    "omega",
                    &OMEGA_FAMILY,
                    Quantity::Lgi4,
                    tau_lgi,
                    |o| params(lam, o, 0.0, 0.0),
                ),
            ],
        ),
        "fig3" => (
            "Leggett-Garg c3 and c4 versus tau for several detunings",
            vec![
                family(
                    "fig3_c3",
                    "delta",
                    &DELTA_FAMILY,
                    Quantity::Lgi3,
                    tau_lgi,
                    |d| params(lam, 0.1, d, 0.0),
                ),
                family(
                    "fig3_c4",
                    "delta",
                    &DELTA_FAMILY,
                    Quantity::Lgi4,
                    tau_lgi,
                    |d| params(lam, 0.1, d, 0.0),
                ),
            ],
        ),
        "fig4" => (
            "l1 coherence versus time for several Rabi frequencies",
            vec![family(
                "fig4",
                "omega",
                &OMEGA_FAMILY,
                Quantity::Coherence,
                Axis::linear(AxisKind::Time, 0.0, 100.0, 1001),
                |o| params(lam, o, 0.0, FRAC_PI_4),
            )],
        ),
        "fig5" => {
            let axis = Axis::linear(AxisKind::Tau, 0.0, 300.0, 6001);
            (
                "Quantum witness and coherence monotone versus tau",
                vec![
                    family(
                        "fig5a",
                        "omega",
                        &OMEGA_FAMILY,
                        Quantity::Witness,
                        axis,
                        |o| params(lam, o, 0.0, FRAC_PI_4),
                    ),
                    family(
                        "fig5b",
                        "delta",
                        &DELTA_FAMILY,
                        Quantity::Witness,
                        axis,
                        |d| params(lam, 0.1, d, FRAC_PI_4),
                    ),
                ],
            )
        }
        "fig6" => (
            "Effective decay rate versus time for several Rabi frequencies",
            vec![family(
                "fig6",
                "omega",
                &OMEGA_FAMILY,
                Quantity::DecayRate,
                Axis::linear(AxisKind::Time, 0.0, 100.0, 2001),
                |o| params(lam, o, 0.0, FRAC_PI_4),
            )],
        ),
        "fig7" => (
            "Geometric phase versus cavity width for weak and strong driving",
            vec![
                family(
                    "fig7a",
                    "omega",
                    &[0.01, 0.05, 0.1],
                    Quantity::Gp,
                    lambda_axis,
                    |o| params(lam, o, 0.0, FRAC_PI_6),
                ),
                family(
                    "fig7b",
                    "omega",
                    &[0.3, 0.5, 1.0],
                    Quantity::Gp,
                    lambda_axis,
                    |o| params(lam, o, 0.0, FRAC_PI_6),
                ),
            ],
        ),
        "fig8" => (
            "Geometric phase versus cavity width for several detunings",
            vec![family(
                "fig8",
                "delta",
                &DELTA_FAMILY,
                Quantity::Gp,
                lambda_axis,
                |d| params(lam, 0.1, d, FRAC_PI_6),
            )],
        ),
        "fig9" => {
            let axis = Axis::log(AxisKind::LambdaRatio, 0.01, 10.0, 31);
            let panels = DELTA_FAMILY
                .iter()
                .zip(["fig9a", "fig9b", "fig9c", "fig9d"])
                .map(|(&d, name)| {
                    family(
                        name,
                        "omega",
                        &OMEGA_FAMILY,
                        Quantity::Blp,
                        axis,
                        move |o| params(lam, o, d, 0.0),
                    )
                })
                .collect();
            (
                "BLP non-Markovianity versus cavity width; one panel per detuning",
                panels,
            )
        }
        "fig10" => (
            "BLP non-Markovianity versus detuning for several Rabi frequencies",
            vec![family(
                "fig10",
                "omega",
                &[0.01, 0.1, 0.5, 1.0],
                Quantity::Blp,
                Axis::linear(AxisKind::Delta, 0.0, 10.0, 41),
                |o| params(lam, o, 0.0, 0.0),
            )],
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(Preset {
        name: name.to_string(),
        description: description.to_string(),
        panels,
    })
}

/// Runs every sweep of the preset, writing one CSV per panel and the
/// manifest into `out_dir`.
pub fn run_preset(preset: &Preset, out_dir: &Path) -> Result<Vec<PanelReport>> {
    std::fs::create_dir_all(out_dir)?;
    let mut reports = Vec::with_capacity(preset.panels.len());
    for panel in &preset.panels {
        let quantity = panel.quantity()?;
        let axis = panel.curves[0].spec.axis.kind;
        let path = out_dir.join(&panel.file);
        let mut sink = CsvSink::new(
            BufWriter::new(File::create(&path)?),
            quantity,
            axis,
            Some(&panel.curve_param),
        )?;
        let mut outputs = Vec::with_capacity(panel.curves.len());
        for curve in &panel.curves {
            let out = run_sweep(&curve.spec)?;
            sink.append(&out, Some(curve.value))?;
            outputs.push((curve.value, out));
        }
        sink.finish()?;
        reports.push(PanelReport {
            panel: panel.name.clone(),
            path,
            curve_param: panel.curve_param.clone(),
            outputs,
        });
    }
    let manifest = Manifest::new(preset.clone());
    std::fs::write(out_dir.join(preset.manifest_file()), manifest.to_toml()?)?;
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let p = figure_preset(name).unwrap();
            assert!(!p.panels.is_empty());
            for spec in p.specs() {
                spec.validate().unwrap();
            }
        }
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(
            figure_preset("fig11"),
            Err(Error::UnknownPreset("fig11".into()))
        );
    }

    #[test]
    fn manifest_round_trip() {
        for name in PRESET_NAMES {
            let p = figure_preset(name).unwrap();
            let text = Manifest::new(p.clone()).to_toml().unwrap();
            let back = Manifest::from_toml(&text).unwrap();
            assert_eq!(back.preset.specs(), p.specs());
            assert_eq!(back.preset, p);
        }
    }

    #[test]
    fn manifest_rejects_other_schema() {
        let text = Manifest::new(figure_preset("fig2").unwrap())
            .to_toml()
            .unwrap();
        let text = text.replacen("schema = 1", "schema = 99", 1);
        assert!(Manifest::from_toml(&text).is_err());
    }

    #[test]
    fn fig2_writes_curves_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = figure_preset("fig2").unwrap();
        let reports = run_preset(&p, dir.path()).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert_eq!(r.outputs.len(), OMEGA_FAMILY.len());
            assert_eq!(r.error_rows(), 0);
            let text = std::fs::read_to_string(&r.path).unwrap();
            assert!(text.starts_with("# qcavity-sweep schema=1"));
            assert!(text
                .lines()
                .nth(1)
                .unwrap()
                .starts_with("curve_omega,status"));
            assert_eq!(text.lines().count(), 2 + 5 * 401);
        }
        let m = Manifest::read(&dir.path().join("fig2_manifest.toml")).unwrap();
        assert_eq!(m.preset, p);
    }
}
