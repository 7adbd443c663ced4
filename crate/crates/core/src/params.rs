//! Physical parameters of the driven qubit and the constants of its exact
//! single-excitation solution.
//!
//! Every rate is expressed in units of the qubit decay rate `gamma` and every
//! time in units of `1/gamma`. Nothing downstream depends on the bare qubit
//! frequency, which only enters through the rotating-wave approximation.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Driving strength or detuning above which the rotating-wave regime is
/// considered stretched.
pub const RWA_WARNING_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Qubit decay rate; the unit of all other rates.
    pub gamma: f64,
    /// Spectral width of the Lorentzian cavity.
    pub lambda: f64,
    /// Rabi coupling to the classical field.
    pub omega_rabi: f64,
    /// Qubit / classical-field detuning.
    pub delta_qc: f64,
    /// Qubit / cavity-center detuning.
    pub delta_cav: f64,
    /// Initial superposition angle, `cos(theta)|A> + sin(theta)|B>`.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamWarning {
    /// `omega_rabi` or `|delta_qc|` exceed ten decay rates.
    RotatingWaveStretched,
    /// `lambda >= gamma`: weak qubit-cavity coupling, outside the regime where
    /// the effective Hamiltonian was derived.
    WeakCoupling,
}

impl std::fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamWarning::RotatingWaveStretched => {
                f.write_str("Rabi frequency or detuning above ten decay rates; the rotating-wave treatment is stretched")
            }
            ParamWarning::WeakCoupling => {
                f.write_str("lambda >= gamma: weak qubit-cavity coupling, outside the strong-coupling regime of the model")
            }
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lambda: 0.01,
            omega_rabi: 0.0,
            delta_qc: 0.0,
            delta_cav: 0.0,
            theta: 0.0,
        }
    }
}

impl SystemParams {
    /// Parameters in units of `gamma = 1`.
    pub fn new(lambda: f64, omega_rabi: f64, delta_qc: f64) -> Self {
        Self {
            lambda,
            omega_rabi,
            delta_qc,
            ..Self::default()
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_delta_cav(mut self, delta_cav: f64) -> Self {
        self.delta_cav = delta_cav;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("omega", self.omega_rabi),
            ("delta", self.delta_qc),
            ("delta_cav", self.delta_cav),
            ("theta", self.theta),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if self.lambda <= 0.0 {
            return Err(invalid(
                "lambda",
                format!("must be > 0, got {}", self.lambda),
            ));
        }
        if self.omega_rabi < 0.0 {
            return Err(invalid(
                "omega",
                format!("must be >= 0, got {}", self.omega_rabi),
            ));
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&self.theta) {
            return Err(invalid(
                "theta",
                format!("must lie in [0, pi/2], got {}", self.theta),
            ));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut out = Vec::new();
        if self.omega_rabi > RWA_WARNING_LIMIT * self.gamma
            || self.delta_qc.abs() > RWA_WARNING_LIMIT * self.gamma
        {
            out.push(ParamWarning::RotatingWaveStretched);
        }
        if self.lambda >= self.gamma {
            out.push(ParamWarning::WeakCoupling);
        }
        out
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let eta = (2.0 * self.omega_rabi).atan2(self.delta_qc);
        let omega_d = self.delta_qc.hypot(2.0 * self.omega_rabi);
        let m_const = Complex64::new(self.lambda, -(omega_d + self.delta_cav - self.delta_qc));
        let one_plus_cos = 1.0 + eta.cos();
        let f_sq =
            4.0 * m_const * m_const - 2.0 * self.gamma * self.lambda * one_plus_cos * one_plus_cos;
        Ok(DerivedParams {
            gamma: self.gamma,
            lambda: self.lambda,
            eta,
            omega_d,
            m_const,
            f_const: f_sq.sqrt(),
            tau_r: 1.0 / self.lambda,
            tau_q: 1.0 / self.gamma,
        })
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        SpectralDensity {
            center_offset: self.delta_cav,
            width: self.lambda,
            strength: self.gamma,
        }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

/// Dressed-state quantities and the complex constants of the closed-form
/// amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub gamma: f64,
    pub lambda: f64,
    /// Mixing angle of the dressed states, `atan2(2 Omega, Delta)`.
    pub eta: f64,
    /// Dressed qubit frequency `sqrt(Delta^2 + 4 Omega^2)`.
    pub omega_d: f64,
    /// `lambda - i (omega_d + delta_cav - delta_qc)`.
    pub m_const: Complex64,
    /// `sqrt(4 M^2 - 2 gamma lambda (1 + cos eta)^2)`, principal branch.
    pub f_const: Complex64,
    /// Reservoir correlation time.
    pub tau_r: f64,
    /// Qubit relaxation time (approximate).
    pub tau_q: f64,
}

impl DerivedParams {
    /// Fraction `cos^4(eta/2)` of the cavity coupling felt by the dressed
    /// transition.
    pub fn coupling_factor(&self) -> f64 {
        let c = 0.5 * (1.0 + self.eta.cos());
        c * c
    }

    /// Memory kernel `(gamma lambda / 2) exp(-M dt)`.
    pub fn kernel(&self, dt: f64) -> Complex64 {
        0.5 * self.gamma * self.lambda * (-self.m_const * dt).exp()
    }

    /// Geometric-phase period `2 pi / omega_d`, if the dressed frequency is
    /// nonzero.
    pub fn period(&self) -> Option<f64> {
        (self.omega_d > 0.0).then(|| 2.0 * PI / self.omega_d)
    }
}

/// Lorentzian spectral density of the cavity modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub center_offset: f64,
    pub width: f64,
    pub strength: f64,
}

impl SpectralDensity {
    /// `J` at `omega_offset = omega_0 - omega_k`.
    pub fn density(&self, omega_offset: f64) -> f64 {
        let x = omega_offset - self.center_offset;
        self.strength * self.width * self.width / (2.0 * PI * (x * x + self.width * self.width))
    }

    /// Analytic total weight, `strength * width / 2`.
    pub fn total_weight(&self) -> f64 {
        0.5 * self.strength * self.width
    }
}
