//! Instantaneous eigensystem of the evolved qubit state and the kinematic
//! geometric phase over one dressed period.
//!
//! For a pure initial state only the dominant eigenbranch contributes, and the
//! phase after `T = 2 pi / omega_d` reduces to `omega_d * int_0^T cos^2(Theta)`
//! where `cos(Theta)` is the `|A>` component of the dominant eigenvector.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::quadrature;
use crate::params::DerivedParams;

/// Default absolute tolerance on the phase.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Eigenvalue gap below which the eigensystem is flagged as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub eps_plus: f64,
    pub eps_minus: f64,
    /// `|A>` component of the dominant eigenvector.
    pub cos_theta_big: f64,
    /// Magnitude of its `|B>` component.
    pub sin_theta_big: f64,
    /// Relative phase of the `|B>` component, `-arg(rho_AB)`.
    pub phase: f64,
    pub degenerate: bool,
}

impl EigenSystem {
    /// `(|eps+>, |eps->)` as `[A-component, B-component]`.
    pub fn eigenvectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let e = Complex64::from_polar(1.0, self.phase);
        let c = Complex64::new(self.cos_theta_big, 0.0);
        let s = self.sin_theta_big;
        ([c, s * e], [-s * e.conj(), c])
    }

    /// `eps+ |eps+><eps+| + eps- |eps-><eps-|`.
    pub fn reconstruct(&self) -> [[Complex64; 2]; 2] {
        let (vp, vm) = self.eigenvectors();
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] =
                    self.eps_plus * vp[i] * vp[j].conj() + self.eps_minus * vm[i] * vm[j].conj();
            }
        }
        rho
    }
}

/// Eigen-decomposition of the state evolved from `cos(theta)|A> + sin(theta)|B>`.
pub fn eigensystem(dp: &DerivedParams, theta: f64, t: f64) -> EigenSystem {
    let a = dp.amplitude(t);
    let p = theta.cos().powi(2) * a.norm_sqr();
    let c = 0.5 * (2.0 * theta).sin() * a;
    let c_abs = c.norm();
    let gap = (2.0 * c_abs).hypot(2.0 * p - 1.0);
    let eps_plus = 0.5 * (1.0 + gap);
    let eps_minus = 0.5 * (1.0 - gap);
    let degenerate = gap < DEGENERACY_GAP;

    if c_abs == 0.0 {
        // Diagonal state: the eigenbasis is the dressed basis itself.
        let cos_theta_big = if p >= 0.5 { 1.0 } else { 0.0 };
        return EigenSystem {
            eps_plus,
            eps_minus,
            cos_theta_big,
            sin_theta_big: 1.0 - cos_theta_big,
            phase: 0.0,
            degenerate,
        };
    }

    // The two components of the dominant eigenvector satisfy x * y = |c|^2;
    // build it from whichever one is free of cancellation.
    let (cos_theta_big, sin_theta_big) = if p >= 0.5 {
        let x = 0.5 * (2.0 * p - 1.0 + gap);
        let n = x.hypot(c_abs);
        (x / n, c_abs / n)
    } else {
        let y = 0.5 * (1.0 - 2.0 * p + gap);
        let n = y.hypot(c_abs);
        (c_abs / n, y / n)
    };
    EigenSystem {
        eps_plus,
        eps_minus,
        cos_theta_big,
        sin_theta_big,
        phase: -c.arg(),
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricPhase {
    /// Accumulated phase in radians, in `[0, 2 pi]`, not wrapped.
    pub phi_g: f64,
    pub error_estimate: f64,
    /// At least one quadrature node hit a degenerate eigensystem.
    pub degenerate: bool,
}

/// Kinematic geometric phase over one dressed period.
pub fn geometric_phase(dp: &DerivedParams, theta: f64, quad_tol: f64) -> Result<GeometricPhase> {
    geometric_phase_observed(dp, theta, quad_tol, |_, _| {})
}

/// As [`geometric_phase`], calling `observer(t, eigensystem)` at every
/// quadrature node.
pub fn geometric_phase_observed<O>(
    dp: &DerivedParams,
    theta: f64,
    quad_tol: f64,
    mut observer: O,
) -> Result<GeometricPhase>
where
    O: FnMut(f64, &EigenSystem),
{
    if dp.period().is_none() {
        return Err(Error::UndefinedPeriod);
    }
    let omega_d = dp.omega_d;
    let mut degenerate = false;
    // Integrate over the dressed phase s = omega_d t in [0, 2 pi].
    let r = quadrature::integrate(
        |s| {
            let t = s / omega_d;
            let eig = eigensystem(dp, theta, t);
            observer(t, &eig);
            degenerate |= eig.degenerate;
            eig.cos_theta_big * eig.cos_theta_big
        },
        0.0,
        TAU,
        quad_tol,
    )?;
    Ok(GeometricPhase {
        phi_g: r.value,
        error_estimate: r.error,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::state::evolve_superposition;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn dp(lambda: f64, omega: f64, delta: f64) -> DerivedParams {
        SystemParams::new(lambda, omega, delta).derive().unwrap()
    }

    #[test]
    fn pure_initial_state() {
        let d = dp(0.1, 0.3, 0.0);
        for theta in [0.0, 0.3, FRAC_PI_6, 1.0] {
            let e = eigensystem(&d, theta, 0.0);
            assert!((e.eps_plus - 1.0).abs() < 1e-15);
            assert!(e.eps_minus.abs() < 1e-15);
            assert!((e.cos_theta_big - theta.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_state_picks_dressed_basis() {
        let d = dp(0.01, 0.0, 0.0);
        let early = eigensystem(&d, 0.0, 1.0);
        assert!(d.amplitude(1.0).norm_sqr() > 0.5);
        assert_eq!(early.cos_theta_big, 1.0);
        let late = eigensystem(&d, 0.0, 20.0);
        assert!(d.amplitude(20.0).norm_sqr() < 0.5);
        assert_eq!(late.cos_theta_big, 0.0);
        assert!(eigensystem(&d, FRAC_PI_2, 3.0).cos_theta_big < 1e-15);
    }

    #[test]
    fn reconstruction_recovers_state() {
        let d = dp(0.2, 0.7, -0.4);
        for (theta, t) in [(0.3, 1.0), (1.1, 7.0), (FRAC_PI_6, 20.0), (0.05, 3.3)] {
            let e = eigensystem(&d, theta, t);
            let rho = evolve_superposition(&d, theta, t).rho;
            let rec = e.reconstruct();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((rho[i][j] - rec[i][j]).norm() < 1e-12);
                }
            }
            assert!((e.eps_plus + e.eps_minus - 1.0).abs() < 1e-12);
            let (vp, vm) = e.eigenvectors();
            let overlap = vp[0].conj() * vm[0] + vp[1].conj() * vm[1];
            assert!(overlap.norm() < 1e-15);
        }
    }

    #[test]
    fn degeneracy_is_flagged() {
        let d = dp(0.01, 0.0, 0.0);
        let t =
            crate::numerics::bisect(|t| d.amplitude(t).norm_sqr() - 0.5, 0.0, 20.0, 1e-15).unwrap();
        assert!(eigensystem(&d, 0.0, t).degenerate);
        assert!(!eigensystem(&d, 0.0, 0.0).degenerate);
    }

    #[test]
    fn closed_system_limit() {
        let d = SystemParams::new(0.01, 0.1, 0.0)
            .with_gamma(1e-12)
            .derive()
            .unwrap();
        let g = geometric_phase(&d, FRAC_PI_6, DEFAULT_QUAD_TOL).unwrap();
        assert!((g.phi_g - 1.5 * PI).abs() < 1e-4);
    }

    #[test]
    fn dark_state_has_no_phase() {
        let g = geometric_phase(&dp(0.1, 0.5, 0.0), FRAC_PI_2, DEFAULT_QUAD_TOL).unwrap();
        assert!(g.phi_g.abs() < 1e-20);
    }

    #[test]
    fn undefined_without_dressed_frequency() {
        assert_eq!(
            geometric_phase(&dp(0.1, 0.0, 0.0), FRAC_PI_6, DEFAULT_QUAD_TOL),
            Err(Error::UndefinedPeriod)
        );
    }

    #[test]
    fn phase_decreases_with_cavity_width() {
        let small = geometric_phase(&dp(0.01, 0.1, 0.0), FRAC_PI_6, DEFAULT_QUAD_TOL).unwrap();
        let large = geometric_phase(&dp(1.0, 0.1, 0.0), FRAC_PI_6, DEFAULT_QUAD_TOL).unwrap();
        assert!(large.phi_g < small.phi_g);
        assert!((0.0..=TAU).contains(&large.phi_g));
    }
}
