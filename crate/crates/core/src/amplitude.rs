//! Survival amplitude `A(t)` of the dressed excited state.
//!
//! With the exponential memory kernel the amplitude has the closed form
//!
//! ```text
//! A(t) = exp(-M t / 2) [cosh(F t / 4) + (2 M / F) sinh(F t / 4)]
//! ```
//!
//! and its derivative is `-g exp(-M t / 2) sinh(F t / 4) / F` with
//! `g = gamma lambda (1 + cos eta)^2 / 2`. Both are even in `F`, so the branch
//! of the square root does not matter.
//!
//! For `|F t / 4| >= 1` the hyperbolic functions are expanded into the two
//! exponential modes `exp((-M/2 +- F/4) t)`, which never overflow; below that
//! the `cosh`/`sinhc` form avoids the cancellation in `2 M / F` near critical
//! damping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ode::Dopri5;
use crate::params::{DerivedParams, SystemParams};

/// Below this `|F t|` the series `sinh(z)/z = 1 + z^2/6` is used.
const SERIES_THRESHOLD: f64 = 1e-6;

/// `|A|` below which the decay rate is reported as a pole.
pub const POLE_THRESHOLD: f64 = 1e-14;

fn sinhc(z: Complex64) -> Complex64 {
    if 4.0 * z.norm() < SERIES_THRESHOLD {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

impl DerivedParams {
    /// `2 gamma lambda cos^4(eta/2)`.
    pub fn effective_coupling(&self) -> f64 {
        2.0 * self.gamma * self.lambda * self.coupling_factor()
    }

    /// `A(t)` and `dA/dt` evaluated together.
    pub fn amplitude_and_derivative(&self, t: f64) -> (Complex64, Complex64) {
        let m = self.m_const;
        let f = self.f_const;
        let g = self.effective_coupling();
        let z = f * (0.25 * t);
        if z.norm() < 1.0 {
            let pre = (-m * (0.5 * t)).exp();
            let sc = sinhc(z);
            let a = pre * (z.cosh() + m * (0.5 * t) * sc);
            let da = -g * pre * (0.25 * t) * sc;
            (a, da)
        } else {
            let half_m = m * 0.5;
            let quarter_f = f * 0.25;
            let e_plus = ((-half_m + quarter_f) * t).exp();
            let e_minus = ((-half_m - quarter_f) * t).exp();
            let ratio = 2.0 * m / f;
            let a = 0.5 * ((1.0 + ratio) * e_plus + (1.0 - ratio) * e_minus);
            let da = -g * (e_plus - e_minus) / (2.0 * f);
            (a, da)
        }
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.amplitude_and_derivative(t).0
    }

    pub fn amplitude_derivative(&self, t: f64) -> Complex64 {
        self.amplitude_and_derivative(t).1
    }

    /// `d|A|/dt`; zero where `A` vanishes.
    pub fn abs_amplitude_derivative(&self, t: f64) -> f64 {
        let (a, da) = self.amplitude_and_derivative(t);
        let n = a.norm();
        if n == 0.0 {
            0.0
        } else {
            (a.conj() * da).re / n
        }
    }

    /// Effective time-dependent decay rate `-2 Re(A'/A)`.
    pub fn decay_rate(&self, t: f64) -> Result<f64> {
        let (a, da) = self.amplitude_and_derivative(t);
        let n = a.norm();
        if n < POLE_THRESHOLD {
            return Err(Error::Pole { t, abs_a: n });
        }
        Ok(-2.0 * (da / a).re)
    }
}

pub fn amplitude_closed_form(dp: &DerivedParams, t: f64) -> Complex64 {
    dp.amplitude(t)
}

pub fn decay_rate(dp: &DerivedParams, t: f64) -> Result<f64> {
    dp.decay_rate(t)
}

/// Sampled amplitude `A(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub params: SystemParams,
}

impl AmplitudeTrajectory {
    pub fn closed_form(params: SystemParams, times: &[f64]) -> Result<Self> {
        let dp = params.derive()?;
        Ok(Self {
            times: times.to_vec(),
            values: times.iter().map(|&t| dp.amplitude(t)).collect(),
            params,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest `|A_self - A_other|` over common samples.
    pub fn max_deviation(&self, other: &AmplitudeTrajectory) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the local system equivalent to the memory equation:
/// `A' = -cos^4(eta/2) B`, `B' = (gamma lambda / 2) A - M B`, where `B` is the
/// running convolution of the kernel with `A`.
fn oracle_rhs(dp: &DerivedParams) -> impl Fn(f64, &[Complex64; 2]) -> [Complex64; 2] {
    let c = dp.coupling_factor();
    let k0 = 0.5 * dp.gamma * dp.lambda;
    let m = dp.m_const;
    move |_, y| [-c * y[1], k0 * y[0] - m * y[1]]
}

const ORACLE_INITIAL: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];

/// Integrates the memory equation numerically with adaptive step control,
/// recording every accepted step up to `t_max`.
pub fn amplitude_oracle_ode(
    params: &SystemParams,
    t_max: f64,
    tol: f64,
) -> Result<AmplitudeTrajectory> {
    check_tol(tol)?;
    let dp = params.derive()?;
    let (times, states) =
        Dopri5::new(tol).trajectory(oracle_rhs(&dp), 0.0, ORACLE_INITIAL, t_max)?;
    Ok(AmplitudeTrajectory {
        times,
        values: states.into_iter().map(|s| s[0]).collect(),
        params: *params,
    })
}

/// Same integration as [`amplitude_oracle_ode`], sampled exactly at `times`.
pub fn amplitude_oracle_on_grid(
    params: &SystemParams,
    times: &[f64],
    tol: f64,
) -> Result<AmplitudeTrajectory> {
    check_tol(tol)?;
    let dp = params.derive()?;
    let states = Dopri5::new(tol).integrate(oracle_rhs(&dp), 0.0, ORACLE_INITIAL, times)?;
    Ok(AmplitudeTrajectory {
        times: times.to_vec(),
        values: states.into_iter().map(|s| s[0]).collect(),
        params: *params,
    })
}

/// Largest `|A_closed - A_ode|` over `samples` evenly spaced times in
/// `[0, t_max]`, with the ODE integrated at tolerance `tol`.
pub fn oracle_max_deviation(
    params: &SystemParams,
    t_max: f64,
    samples: usize,
    tol: f64,
) -> Result<f64> {
    if samples < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "need t_max > 0 and >= 2 samples, got {t_max} and {samples}"
        )));
    }
    let times: Vec<f64> = (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect();
    let oracle = amplitude_oracle_on_grid(params, &times, tol)?;
    let closed = AmplitudeTrajectory::closed_form(*params, &times)?;
    Ok(closed.max_deviation(&oracle))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be > 0, got {tol}"),
        })
    }
}
