//! Temporal quantumness: two-time correlations and Leggett-Garg sums, the
//! blind-measurement quantum witness and the coherence monotone.
//!
//! All measurement sequences start at `t1 = 0`. Correlators always evaluate
//! the amplitude at the later time and at the (nonnegative) time difference.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DerivedParams;

/// Classical bound on `C3`.
pub const C3_BOUND: f64 = 1.0;
/// Classical bound on `C4`.
pub const C4_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LgiResult {
    pub tau: f64,
    pub c3: f64,
    pub c4: f64,
    pub violated3: bool,
    pub violated4: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessResult {
    pub tau: f64,
    pub w_q: f64,
    /// Coherence monotone at `tau`.
    pub envelope: f64,
}

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be a finite time >= 0, got {t}"),
        })
    }
}

/// Symmetrized `sigma_x` correlation between measurements at `t_i` and `t_j`.
/// The arguments may be given in either order.
pub fn two_time_correlation(dp: &DerivedParams, theta: f64, t_i: f64, t_j: f64) -> Result<f64> {
    check_time("t_i", t_i)?;
    check_time("t_j", t_j)?;
    let (early, late) = if t_i <= t_j { (t_i, t_j) } else { (t_j, t_i) };
    Ok(correlation_ordered(dp, theta, early, late))
}

fn correlation_ordered(dp: &DerivedParams, theta: f64, early: f64, late: f64) -> f64 {
    if late == 0.0 {
        // Both measurements on the initial state: sigma_x squared is 1.
        return 1.0;
    }
    let dt = late - early;
    let phase = Complex64::from_polar(1.0, -dp.omega_d * dt);
    let (s, c) = theta.sin_cos();
    let coherent = dp.amplitude(late) * dp.amplitude(early).conj();
    let retarded = dp.amplitude(dt);
    ((c * c * coherent + s * s * retarded) * phase).re
}

/// `C3` and `C4` for equally spaced measurements `0, tau, 2 tau, 3 tau`.
pub fn leggett_garg(dp: &DerivedParams, theta: f64, tau: f64) -> Result<LgiResult> {
    check_time("tau", tau)?;
    let c = |i: f64, j: f64| correlation_ordered(dp, theta, i * tau, j * tau);
    let c21 = c(0.0, 1.0);
    let c32 = c(1.0, 2.0);
    let c3 = c21 + c32 - c(0.0, 2.0);
    let c4 = c21 + c32 + c(2.0, 3.0) - c(0.0, 3.0);
    Ok(LgiResult {
        tau,
        c3,
        c4,
        violated3: c3 > C3_BOUND,
        violated4: c4 > C4_BOUND,
    })
}

/// Three-time inequality; the returned record also carries `C4`.
pub fn lgi_c3(dp: &DerivedParams, theta: f64, tau: f64) -> Result<LgiResult> {
    leggett_garg(dp, theta, tau)
}

/// Four-time inequality; the returned record also carries `C3`.
pub fn lgi_c4(dp: &DerivedParams, theta: f64, tau: f64) -> Result<LgiResult> {
    leggett_garg(dp, theta, tau)
}

/// Classical propagator `Lambda(t, 0)` in the `{|+>, |->}` basis.
pub fn propagator(dp: &DerivedParams, t: f64) -> [[f64; 2]; 2] {
    let re_a = dp.amplitude(t).re;
    let d = 0.5 * (1.0 + re_a);
    let o = 0.5 * (1.0 - re_a);
    [[d, o], [o, d]]
}

fn apply(m: &[[f64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * p[0] + m[0][1] * p[1],
        m[1][0] * p[0] + m[1][1] * p[1],
    ]
}

/// Probability of `|+>` at `tau` without (`p_plus`) and with (`p_plus_blind`)
/// a nonselective `{|+>, |->}` measurement at `tau / 2`, both propagated
/// through [`propagator`].
pub fn witness_probabilities(dp: &DerivedParams, theta: f64, tau: f64) -> (f64, f64) {
    let s = (2.0 * theta).sin();
    let p0 = [0.5 * (1.0 + s), 0.5 * (1.0 - s)];
    let full = apply(&propagator(dp, tau), p0);
    let half = propagator(dp, 0.5 * tau);
    let blind = apply(&half, apply(&half, p0));
    (full[0], blind[0])
}

/// Closed-form quantum witness `|p_+ - p'_+|`.
pub fn quantum_witness(dp: &DerivedParams, theta: f64, tau: f64) -> Result<f64> {
    check_time("tau", tau)?;
    let two_re_full = 2.0 * dp.amplitude(tau).re;
    let two_re_half = 2.0 * dp.amplitude(0.5 * tau).re;
    Ok(0.25 * ((2.0 * theta).sin() * (two_re_full - 0.5 * two_re_half * two_re_half)).abs())
}

/// Witness on a grid together with the envelope of half the l1 coherence of
/// the evolved superposition.
pub fn witness_series(dp: &DerivedParams, theta: f64, taus: &[f64]) -> Result<Vec<WitnessResult>> {
    let scale = (2.0 * theta).sin().abs();
    let envelope = coherence_monotone(dp, taus)?;
    taus.iter()
        .zip(envelope)
        .map(|(&tau, env)| {
            Ok(WitnessResult {
                tau,
                w_q: quantum_witness(dp, theta, tau)?,
                envelope: scale * env,
            })
        })
        .collect()
}

/// Envelope of `|A(tau)| / 2` on a strictly increasing grid.
pub fn coherence_monotone(dp: &DerivedParams, taus: &[f64]) -> Result<Vec<f64>> {
    if taus.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "need at least 3 points, got {}",
            taus.len()
        )));
    }
    if taus[0].partial_cmp(&0.0).is_none_or(|o| o.is_lt())
        || taus
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidGrid(
            "times must be nonnegative and strictly increasing".into(),
        ));
    }
    let half_abs: Vec<f64> = taus.iter().map(|&t| 0.5 * dp.amplitude(t).norm()).collect();
    Ok(upper_envelope(taus, &half_abs))
}

/// Piecewise-linear interpolation through the local maxima of `values`
/// (endpoints count when they are one-sided maxima). Outside the first and
/// last knot the envelope follows the curve, and it is never below it.
pub fn upper_envelope(xs: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let knots = local_maxima(values);
    let mut out = values.to_vec();
    for pair in knots.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let (x0, x1) = (xs[i], xs[j]);
        let (y0, y1) = (values[i], values[j]);
        for k in i..=j {
            let w = (xs[k] - x0) / (x1 - x0);
            out[k] = out[k].max(y0 + w * (y1 - y0));
        }
    }
    debug_assert_eq!(out.len(), n);
    out
}

/// Indices of local maxima, with plateaus reported at their left edge.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut idx = Vec::new();
    if n == 0 {
        return idx;
    }
    if n == 1 || values[0] >= values[1] {
        idx.push(0);
    }
    for i in 1..n.saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            idx.push(i);
        }
    }
    if n > 1 && values[n - 1] > values[n - 2] {
        idx.push(n - 1);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use std::f64::consts::FRAC_PI_4;

    fn dp(lambda: f64, omega: f64, delta: f64) -> DerivedParams {
        SystemParams::new(lambda, omega, delta).derive().unwrap()
    }

    #[test]
    fn correlation_at_origin_is_one() {
        for theta in [0.0, 0.4, FRAC_PI_4, 1.2] {
            let c = two_time_correlation(&dp(0.01, 2.0, 0.0), theta, 0.0, 0.0).unwrap();
            assert!((c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn correlation_without_superposition() {
        let d = dp(0.1, 0.5, 0.3);
        let (ti, tj) = (1.3, 4.1);
        let expected = (d.amplitude(tj)
            * d.amplitude(ti).conj()
            * Complex64::from_polar(1.0, -d.omega_d * (tj - ti)))
        .re;
        assert!((two_time_correlation(&d, 0.0, ti, tj).unwrap() - expected).abs() < 1e-15);
        // symmetric in its arguments
        assert_eq!(
            two_time_correlation(&d, 0.3, ti, tj).unwrap(),
            two_time_correlation(&d, 0.3, tj, ti).unwrap()
        );
    }

    #[test]
    fn correlation_in_closed_system_limit() {
        let d = SystemParams::new(0.01, 0.4, 0.0)
            .with_gamma(1e-300)
            .derive()
            .unwrap();
        for (ti, tj) in [(0.0, 1.0), (2.0, 5.5), (1.0, 1.0)] {
            let c = two_time_correlation(&d, 0.6, ti, tj).unwrap();
            assert!((c - (d.omega_d * (tj - ti)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_rejects_negative_time() {
        assert!(two_time_correlation(&dp(0.01, 0.0, 0.0), 0.0, -1.0, 2.0).is_err());
        assert!(leggett_garg(&dp(0.01, 0.0, 0.0), 0.0, -0.1).is_err());
    }

    #[test]
    fn lgi_boundary_values() {
        let r = leggett_garg(&dp(0.01, 2.0, 0.0), 0.0, 0.0).unwrap();
        assert!((r.c3 - 1.0).abs() < 1e-12);
        assert!((r.c4 - 2.0).abs() < 1e-12);
        assert!(!r.violated4);
    }

    #[test]
    fn propagator_is_stochastic() {
        let d = dp(0.5, 0.0, 0.0);
        let id = propagator(&d, 0.0);
        assert_eq!(id, [[1.0, 0.0], [0.0, 1.0]]);
        for t in [0.3, 2.0, 10.0] {
            let m = propagator(&d, t);
            for (top, bottom) in m[0].iter().zip(&m[1]) {
                assert!((top + bottom - 1.0).abs() < 1e-15);
                assert!((0.0..=1.0).contains(top) && (0.0..=1.0).contains(bottom));
            }
        }
        let late = propagator(&d, 200.0);
        for row in late {
            for v in row {
                assert!((v - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn witness_vanishes_without_coherence_or_time() {
        let d = dp(0.01, 0.1, 0.0);
        for tau in [0.0, 1.0, 30.0, 300.0] {
            assert_eq!(quantum_witness(&d, 0.0, tau).unwrap(), 0.0);
        }
        assert_eq!(quantum_witness(&d, FRAC_PI_4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn witness_matches_propagator_route() {
        let d = dp(0.05, 0.3, 0.7);
        for &tau in &[0.5, 3.0, 40.0] {
            let (p, pb) = witness_probabilities(&d, 0.4, tau);
            assert!(((p - pb).abs() - quantum_witness(&d, 0.4, tau).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_of_monotone_curve_is_the_curve() {
        let d = dp(2.5, 0.0, 0.0);
        let taus: Vec<f64> = (0..500).map(|i| i as f64 * 0.1).collect();
        let env = coherence_monotone(&d, &taus).unwrap();
        assert_eq!(env[0], 0.5);
        for (t, e) in taus.iter().zip(&env) {
            assert_eq!(*e, 0.5 * d.amplitude(*t).norm());
        }
    }

    #[test]
    fn envelope_bounds_oscillating_curve() {
        let d = dp(0.01, 0.0, 0.0);
        let taus: Vec<f64> = (0..4000).map(|i| i as f64 * 0.1).collect();
        let env = coherence_monotone(&d, &taus).unwrap();
        assert_eq!(env[0], 0.5);
        for (t, e) in taus.iter().zip(&env) {
            assert!(*e >= 0.5 * d.amplitude(*t).norm());
        }
    }

    #[test]
    fn envelope_rejects_short_or_unordered_grid() {
        let d = dp(0.01, 0.0, 0.0);
        assert!(matches!(
            coherence_monotone(&d, &[0.0, 1.0]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(coherence_monotone(&d, &[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn local_maxima_with_plateau() {
        assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 0.5, 2.0]), vec![1, 4]);
        assert_eq!(local_maxima(&[3.0, 2.0, 1.0]), vec![0]);
    }
}
