//! Reduced qubit state in the dressed basis `{|A>, |B>}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DerivedParams;

/// Tolerance on trace, Hermiticity and negative eigenvalues.
pub const STATE_TOL: f64 = 1e-12;

/// 2x2 density matrix; index 0 is `|A>`, index 1 is `|B>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho: [[Complex64; 2]; 2],
}

impl QubitState {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(rho: [[Complex64; 2]; 2]) -> Result<Self> {
        let s = Self { rho };
        s.check()?;
        Ok(s)
    }

    pub(crate) fn from_parts(rho_aa: f64, rho_ab: Complex64) -> Self {
        Self {
            rho: [
                [Complex64::new(rho_aa, 0.0), rho_ab],
                [rho_ab.conj(), Complex64::new(1.0 - rho_aa, 0.0)],
            ],
        }
    }

    /// `cos(theta)|A> + sin(theta)|B>`.
    pub fn superposition(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_parts(c * c, Complex64::new(c * s, 0.0))
    }

    pub fn excited() -> Self {
        Self::from_parts(1.0, Complex64::new(0.0, 0.0))
    }

    pub fn dark() -> Self {
        Self::from_parts(0.0, Complex64::new(0.0, 0.0))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_parts(0.5, Complex64::new(0.0, 0.0))
    }

    pub fn rho_aa(&self) -> f64 {
        self.rho[0][0].re
    }

    pub fn rho_ab(&self) -> Complex64 {
        self.rho[0][1]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.rho[0][0].im.abs().max(self.rho[1][1].im.abs());
        d.max((self.rho[0][1] - self.rho[1][0].conj()).norm())
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn check(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let h = self.hermiticity_defect();
        if h > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let [_, low] = self.eigenvalues();
        if low < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    pub fn bloch(&self) -> BlochVector {
        let ab = self.rho_ab();
        BlochVector {
            x: 2.0 * ab.re,
            y: -2.0 * ab.im,
            z: self.rho[0][0].re - self.rho[1][1].re,
        }
    }
}

/// Eigenvalues of a 2x2 Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(m[0][1].norm());
    [mean + r, mean - r]
}

/// Bloch coordinates with `rho = (1 + x sx + y sy + z sz) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        let n = v.norm();
        if !n.is_finite() || n > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!(
                "Bloch vector length {n} exceeds 1"
            )));
        }
        if n > 1.0 {
            return Ok(Self {
                x: x / n,
                y: y / n,
                z: z / n,
            });
        }
        Ok(v)
    }

    /// Pure state at polar angle `alpha` from `|A>` and azimuth `phi`.
    pub fn pure(alpha: f64, phi: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: sa * cp,
            y: sa * sp,
            z: ca,
        }
    }

    pub fn antipode(&self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn to_state(&self) -> QubitState {
        QubitState::from_parts(
            0.5 * (1.0 + self.z),
            Complex64::new(0.5 * self.x, -0.5 * self.y),
        )
    }
}

/// Evolved state of `cos(theta)|A> + sin(theta)|B>`.
pub fn evolve_superposition(dp: &DerivedParams, theta: f64, t: f64) -> QubitState {
    let a = dp.amplitude(t);
    let c2 = theta.cos().powi(2);
    QubitState::from_parts(c2 * a.norm_sqr(), 0.5 * (2.0 * theta).sin() * a)
}

/// Linear extension of the evolution to an arbitrary initial state:
/// `rho_AA -> |A|^2 rho_AA`, `rho_AB -> A rho_AB`, trace preserved.
pub fn apply_channel(dp: &DerivedParams, initial: &QubitState, t: f64) -> Result<QubitState> {
    initial.check()?;
    let a = dp.amplitude(t);
    Ok(QubitState::from_parts(
        a.norm_sqr() * initial.rho_aa(),
        a * initial.rho_ab(),
    ))
}

/// l1-norm coherence, the sum of off-diagonal magnitudes.
pub fn coherence_l1(state: &QubitState) -> f64 {
    2.0 * state.rho_ab().norm()
}

/// Half the sum of absolute eigenvalues of `rho1 - rho2`.
pub fn trace_distance(s1: &QubitState, s2: &QubitState) -> f64 {
    let mut diff = s1.rho;
    for (row, other) in diff.iter_mut().zip(&s2.rho) {
        for (d, o) in row.iter_mut().zip(other) {
            *d -= o;
        }
    }
    let [l0, l1] = hermitian_eigenvalues(&diff);
    0.5 * (l0.abs() + l1.abs())
}

/// Trace distance at time `t` between the evolutions of two states with
/// initial population difference `pop_diff` and coherence difference
/// magnitude `coh_diff`.
pub fn evolved_distance(abs_a: f64, pop_diff: f64, coh_diff: f64) -> f64 {
    let a2 = abs_a * abs_a;
    (pop_diff * pop_diff * a2 * a2 + coh_diff * coh_diff * a2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn dp() -> DerivedParams {
        SystemParams::new(0.01, 0.3, 0.5).derive().unwrap()
    }

    fn close(a: &QubitState, b: &QubitState, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.rho[i][j] - b.rho[i][j]).norm() <= tol))
    }

    #[test]
    fn plus_state_at_start() {
        let s = evolve_superposition(&dp(), FRAC_PI_4, 0.0);
        for row in s.rho {
            for v in row {
                assert!((v - 0.5).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dark_state_is_stationary() {
        let d = dp();
        for t in [0.0, 1.0, 40.0] {
            let s = evolve_superposition(&d, FRAC_PI_2, t);
            assert!(close(&s, &QubitState::dark(), 1e-15));
            let s = apply_channel(&d, &QubitState::dark(), t).unwrap();
            assert_eq!(s, QubitState::dark());
        }
    }

    #[test]
    fn excited_state_stays_diagonal() {
        let d = dp();
        for t in [0.5, 3.0, 17.0] {
            let s = evolve_superposition(&d, 0.0, t);
            let a2 = d.amplitude(t).norm_sqr();
            assert_eq!(s.rho_ab(), Complex64::new(0.0, 0.0));
            assert!((s.rho_aa() - a2).abs() < 1e-15);
            assert!((s.rho[1][1].re - (1.0 - a2)).abs() < 1e-15);
        }
    }

    #[test]
    fn channel_reduces_to_superposition_family() {
        let d = dp();
        let s = apply_channel(&d, &QubitState::superposition(FRAC_PI_6), 2.0).unwrap();
        assert!(close(&s, &evolve_superposition(&d, FRAC_PI_6, 2.0), 1e-14));
    }

    #[test]
    fn maximally_mixed_is_average_of_basis_evolutions() {
        let d = dp();
        let t = 3.3;
        let s = apply_channel(&d, &QubitState::maximally_mixed(), t).unwrap();
        let e0 = evolve_superposition(&d, 0.0, t);
        let e1 = evolve_superposition(&d, FRAC_PI_2, t);
        assert!((s.rho_aa() - 0.5 * (e0.rho_aa() + e1.rho_aa())).abs() < 1e-15);
        assert!((s.rho_aa() - 0.5 * d.amplitude(t).norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn channel_rejects_invalid_input() {
        let bad = QubitState::from_parts(1.5, Complex64::new(0.0, 0.0));
        assert!(matches!(
            apply_channel(&dp(), &bad, 1.0),
            Err(Error::InvalidState(_))
        ));
        let bad = QubitState::from_parts(0.5, Complex64::new(0.6, 0.0));
        assert!(apply_channel(&dp(), &bad, 1.0).is_err());
    }

    #[test]
    fn coherence_values() {
        let d = dp();
        assert_eq!(coherence_l1(&evolve_superposition(&d, 0.0, 4.0)), 0.0);
        let t = 6.0;
        let abs_a = d.amplitude(t).norm();
        assert!((coherence_l1(&evolve_superposition(&d, FRAC_PI_4, t)) - abs_a).abs() < 1e-15);
        let c = coherence_l1(&evolve_superposition(&d, FRAC_PI_6, t));
        assert!((c - 3f64.sqrt() / 2.0 * abs_a).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_basics() {
        let s = QubitState::superposition(0.3);
        assert_eq!(trace_distance(&s, &s), 0.0);
        assert!((trace_distance(&QubitState::excited(), &QubitState::dark()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equatorial_pair_distance_scales_with_amplitude() {
        let d = dp();
        let p = BlochVector::pure(FRAC_PI_2, 0.4);
        for t in [0.0, 2.0, 9.0] {
            let s1 = apply_channel(&d, &p.to_state(), t).unwrap();
            let s2 = apply_channel(&d, &p.antipode().to_state(), t).unwrap();
            assert!((trace_distance(&s1, &s2) - d.amplitude(t).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn bloch_round_trip() {
        let s = QubitState::superposition(0.7);
        let b = s.bloch();
        assert!((b.norm() - 1.0).abs() < 1e-15);
        assert!(close(&b.to_state(), &s, 1e-15));
        assert!(BlochVector::new(1.0, 0.5, 0.0).is_err());
        let clamped = BlochVector::new(1.0 + 5e-13, 0.0, 0.0).unwrap();
        assert!(clamped.norm() <= 1.0);
    }
}
