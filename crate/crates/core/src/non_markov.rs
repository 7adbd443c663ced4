//! BLP non-Markovianity: information flux, backflow intervals and the
//! measure maximized over initial state pairs.
//!
//! For this channel a pair of states with Bloch vectors `v1, v2` evolves into
//! a pair at trace distance
//!
//! ```text
//! D(t) = sqrt(a^2 |A|^4 + |b|^2 |A|^2),
//! ```
//!
//! with `a` the initial population difference and `|b|` the initial coherence
//! difference. `D` grows with `|A|` for every pair, so the backflow intervals
//! (where `d|A|/dt > 0`) do not depend on the pair. The distance at fixed
//! direction is largest for antipodal pure states, leaving a one-parameter
//! search over the polar angle `alpha` (`a = cos alpha`, `|b| = sin alpha`);
//! the azimuth drops out.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bisect, golden_section_max};
use crate::params::{DerivedParams, SystemParams};
use crate::state::{evolved_distance, BlochVector};

/// Amplitude below which the time integral is considered converged.
pub const TRUNCATION_AMPLITUDE: f64 = 1e-4;
/// Shortest horizon chosen automatically, in units of `1/gamma`.
pub const MIN_HORIZON: f64 = 100.0;
/// Longest horizon chosen automatically, in units of `1/gamma`.
pub const MAX_HORIZON: f64 = 2000.0;
/// Bisection tolerance on interval endpoints.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlpOptions {
    /// Integration horizon; `None` picks [`suggested_horizon`].
    pub t_max: Option<f64>,
    /// Number of polar angles on the coarse pair grid.
    pub alpha_grid: usize,
    /// Scan density per unit of `fastest rate * t_max`.
    pub points_per_unit: f64,
    /// Minimum number of scan points.
    pub min_points: usize,
    /// Golden-section tolerance on `alpha`.
    pub alpha_tol: f64,
}

impl Default for BlpOptions {
    fn default() -> Self {
        Self {
            t_max: None,
            alpha_grid: 91,
            points_per_unit: 4000.0,
            min_points: 10_000,
            alpha_tol: 1e-4,
        }
    }
}

/// Antipodal pure-state pair; the second state is the antipode of `first`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatePair {
    pub first: BlochVector,
}

impl StatePair {
    pub fn antipodal(alpha: f64, phi: f64) -> Self {
        Self {
            first: BlochVector::pure(alpha, phi),
        }
    }

    pub fn second(&self) -> BlochVector {
        self.first.antipode()
    }

    /// Population difference `rho1_AA - rho2_AA`.
    pub fn population_difference(&self) -> f64 {
        self.first.z
    }

    /// `|rho1_AB - rho2_AB|`.
    pub fn coherence_difference(&self) -> f64 {
        self.first.x.hypot(self.first.y)
    }

    pub fn distance_at(&self, abs_a: f64) -> f64 {
        evolved_distance(
            abs_a,
            self.population_difference(),
            self.coherence_difference(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackflowIntervals {
    /// Disjoint, ordered `(t_start, t_end)` windows with positive flux.
    pub intervals: Vec<(f64, f64)>,
    /// Trace distance of the pair at each window's endpoints.
    pub d_values: Vec<(f64, f64)>,
}

impl BackflowIntervals {
    pub fn total_increase(&self) -> f64 {
        self.d_values.iter().map(|(s, e)| e - s).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlpResult {
    pub n_measure: f64,
    /// Best value on the coarse alpha grid, before refinement.
    pub grid_n_measure: f64,
    pub best_alpha: f64,
    pub best_pair: (BlochVector, BlochVector),
    pub t_max: f64,
    /// `|A(t_max)| >= TRUNCATION_AMPLITUDE`.
    pub truncated: bool,
    /// Bound on backflow beyond the horizon, `2 |A(t_max)|`.
    pub tail_bound: f64,
    pub interval_count: usize,
}

/// `dD/dt` for the evolved pair.
pub fn info_flux(dp: &DerivedParams, pair: &StatePair, t: f64) -> f64 {
    let abs_a = dp.amplitude(t).norm();
    let d_abs = dp.abs_amplitude_derivative(t);
    let a = pair.population_difference();
    let b = pair.coherence_difference();
    let inner = (a * a * abs_a * abs_a + b * b).sqrt();
    if inner == 0.0 {
        return 0.0;
    }
    d_abs * (2.0 * a * a * abs_a * abs_a + b * b) / inner
}

/// Fastest rate that sets the scan density.
pub fn frequency_scale(dp: &DerivedParams) -> f64 {
    dp.omega_d
        .max(dp.lambda)
        .max(dp.gamma)
        .max(dp.m_const.im.abs())
}

/// Horizon where the amplitude bound drops below [`TRUNCATION_AMPLITUDE`],
/// clamped to `[MIN_HORIZON, MAX_HORIZON]` (in units of `1/gamma`).
pub fn suggested_horizon(dp: &DerivedParams) -> f64 {
    let min_h = MIN_HORIZON / dp.gamma;
    let max_h = MAX_HORIZON / dp.gamma;
    let f = dp.f_const;
    let m = dp.m_const;
    let slowest = 0.5 * m.re - 0.25 * f.re.abs();
    if slowest <= 0.0 || f.norm() < 1e-12 {
        return max_h;
    }
    let ratio = 2.0 * m / f;
    let k = 0.5 * ((1.0 + ratio).norm() + (1.0 - ratio).norm());
    let t = (k / TRUNCATION_AMPLITUDE).ln() / slowest;
    t.clamp(min_h, max_h)
}

/// Windows in `(0, t_max]` where `|A|` grows, found by a dense sign scan of
/// `Re(A* dA/dt)` and bisection refinement.
pub fn backflow_windows(
    dp: &DerivedParams,
    t_max: f64,
    opts: &BlpOptions,
) -> Result<Vec<(f64, f64)>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: format!("must be > 0, got {t_max}"),
        });
    }
    let growth = |t: f64| {
        let (a, da) = dp.amplitude_and_derivative(t);
        (a.conj() * da).re
    };
    let n =
        ((opts.points_per_unit * frequency_scale(dp) * t_max).ceil() as usize).max(opts.min_points);
    let dt = t_max / n as f64;

    let mut windows = Vec::new();
    let mut open: Option<f64> = None;
    let mut prev_t = 0.0;
    let mut prev_pos = false;
    for i in 1..=n {
        let t = if i == n { t_max } else { i as f64 * dt };
        let v = growth(t);
        if !v.is_finite() {
            return Err(Error::UnresolvedBracket { lo: prev_t, hi: t });
        }
        let pos = v > 0.0;
        if pos != prev_pos {
            let root = if i == 1 && pos {
                0.0
            } else {
                bisect(growth, prev_t, t, ROOT_TOL)?
            };
            if pos {
                open = Some(root);
            } else if let Some(start) = open.take() {
                if root > start {
                    windows.push((start, root));
                }
            }
        }
        prev_t = t;
        prev_pos = pos;
    }
    if let Some(start) = open {
        if t_max > start {
            windows.push((start, t_max));
        }
    }
    Ok(windows)
}

fn with_distances(
    dp: &DerivedParams,
    windows: Vec<(f64, f64)>,
    pair: &StatePair,
) -> BackflowIntervals {
    let d_values = windows
        .iter()
        .map(|&(s, e)| {
            (
                pair.distance_at(dp.amplitude(s).norm()),
                pair.distance_at(dp.amplitude(e).norm()),
            )
        })
        .collect();
    BackflowIntervals {
        intervals: windows,
        d_values,
    }
}

/// Backflow windows on `[0, t_max]` with the pair's trace distance at each
/// endpoint.
pub fn backflow_intervals(
    dp: &DerivedParams,
    pair: &StatePair,
    t_max: f64,
    opts: &BlpOptions,
) -> Result<BackflowIntervals> {
    let windows = backflow_windows(dp, t_max, opts)?;
    Ok(with_distances(dp, windows, pair))
}

/// BLP measure over antipodal pure pairs.
pub fn blp_measure(params: &SystemParams, opts: &BlpOptions) -> Result<BlpResult> {
    if opts.alpha_grid < 2 {
        return Err(Error::InvalidParameter {
            name: "alpha_grid",
            reason: format!("need at least 2 angles, got {}", opts.alpha_grid),
        });
    }
    let dp = params.derive()?;
    let t_max = opts.t_max.unwrap_or_else(|| suggested_horizon(&dp));
    let windows = backflow_windows(&dp, t_max, opts)?;
    let endpoints: Vec<(f64, f64)> = windows
        .iter()
        .map(|&(s, e)| (dp.amplitude(s).norm(), dp.amplitude(e).norm()))
        .collect();
    let measure = |alpha: f64| -> f64 {
        let pair = StatePair::antipodal(alpha, 0.0);
        endpoints
            .iter()
            .map(|&(s, e)| pair.distance_at(e) - pair.distance_at(s))
            .sum()
    };

    let step = FRAC_PI_2 / (opts.alpha_grid - 1) as f64;
    let grid: Vec<f64> = (0..opts.alpha_grid)
        .into_par_iter()
        .map(|i| measure(i as f64 * step))
        .collect();
    let (best_i, grid_best) =
        grid.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );

    let lo = best_i.saturating_sub(1) as f64 * step;
    let hi = ((best_i + 1).min(opts.alpha_grid - 1)) as f64 * step;
    let (refined_alpha, refined) = golden_section_max(measure, lo, hi, opts.alpha_tol);
    let (best_alpha, n_measure) = if refined > grid_best {
        (refined_alpha, refined)
    } else {
        (best_i as f64 * step, grid_best)
    };

    let pair = StatePair::antipodal(best_alpha, 0.0);
    let tail = dp.amplitude(t_max).norm();
    Ok(BlpResult {
        n_measure: n_measure.max(0.0),
        grid_n_measure: grid_best.max(0.0),
        best_alpha,
        best_pair: (pair.first, pair.second()),
        t_max,
        truncated: tail >= TRUNCATION_AMPLITUDE,
        tail_bound: 2.0 * tail,
        interval_count: windows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{apply_channel, trace_distance};

    fn dp(lambda: f64, omega: f64, delta: f64) -> DerivedParams {
        SystemParams::new(lambda, omega, delta).derive().unwrap()
    }

    fn fast() -> BlpOptions {
        BlpOptions {
            points_per_unit: 200.0,
            ..BlpOptions::default()
        }
    }

    #[test]
    fn flux_vanishes_at_start() {
        let pair = StatePair::antipodal(0.7, 0.0);
        assert_eq!(info_flux(&dp(0.01, 0.0, 0.0), &pair, 0.0), 0.0);
    }

    #[test]
    fn overdamped_flux_is_never_positive() {
        let d = dp(2.5, 0.0, 0.0);
        let pair = StatePair::antipodal(0.9, 0.3);
        for i in 1..=5000 {
            assert!(info_flux(&d, &pair, i as f64 * 0.01) <= 0.0);
        }
        let w = backflow_windows(&d, 50.0, &fast()).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn flux_sign_follows_amplitude() {
        let d = dp(0.01, 0.0, 0.0);
        for alpha in [0.0, 0.5, 1.2, FRAC_PI_2] {
            let pair = StatePair::antipodal(alpha, 1.0);
            for i in 1..400 {
                let t = i as f64 * 0.137;
                let s = info_flux(&d, &pair, t);
                let g = d.abs_amplitude_derivative(t);
                assert_eq!(s > 0.0, g > 0.0, "t={t}");
            }
        }
    }

    #[test]
    fn flux_matches_finite_difference_of_distance() {
        let d = dp(0.05, 0.2, 0.1);
        let pair = StatePair::antipodal(0.8, 0.0);
        let h = 1e-6;
        for t in [1.0, 6.0, 13.0] {
            let dist = |t: f64| pair.distance_at(d.amplitude(t).norm());
            let fd = (dist(t + h) - dist(t - h)) / (2.0 * h);
            assert!((fd - info_flux(&d, &pair, t)).abs() < 1e-7);
        }
    }

    #[test]
    fn pair_distance_matches_channel() {
        let d = dp(0.1, 0.4, 0.3);
        let pair = StatePair::antipodal(1.1, 2.0);
        for t in [0.0, 2.0, 15.0] {
            let s1 = apply_channel(&d, &pair.first.to_state(), t).unwrap();
            let s2 = apply_channel(&d, &pair.second().to_state(), t).unwrap();
            assert!(
                (trace_distance(&s1, &s2) - pair.distance_at(d.amplitude(t).norm())).abs() < 1e-13
            );
        }
    }

    #[test]
    fn strong_coupling_has_backflow() {
        let d = dp(0.01, 0.0, 0.0);
        let pair = StatePair::antipodal(0.0, 0.0);
        let bf = backflow_intervals(&d, &pair, 50.0, &fast()).unwrap();
        assert!(!bf.intervals.is_empty());
        for (w, (ds, de)) in bf.intervals.iter().zip(&bf.d_values) {
            assert!(w.0 < w.1 && w.1 <= 50.0);
            assert!(de > ds);
        }
        for pair in bf.intervals.windows(2) {
            assert!(pair[0].1 <= pair[1].0);
        }
    }

    #[test]
    fn horizon_is_clamped() {
        assert_eq!(suggested_horizon(&dp(2.5, 0.0, 0.0)), MIN_HORIZON);
        assert_eq!(suggested_horizon(&dp(0.01, 2.0, 0.0)), MAX_HORIZON);
        let h = suggested_horizon(&dp(0.01, 0.0, 0.0));
        assert!(h > MIN_HORIZON && h < MAX_HORIZON);
        assert!(dp(0.01, 0.0, 0.0).amplitude(h).norm() < TRUNCATION_AMPLITUDE);
    }

    #[test]
    fn measure_zero_when_overdamped() {
        let r = blp_measure(&SystemParams::new(2.5, 0.0, 0.0), &fast()).unwrap();
        assert_eq!(r.n_measure, 0.0);
        assert_eq!(r.interval_count, 0);
        assert!(!r.truncated);
    }

    #[test]
    fn rejects_bad_options() {
        let p = SystemParams::new(0.1, 0.0, 0.0);
        assert!(blp_measure(
            &p,
            &BlpOptions {
                alpha_grid: 1,
                ..fast()
            }
        )
        .is_err());
        assert!(blp_measure(
            &p,
            &BlpOptions {
                t_max: Some(-1.0),
                ..fast()
            }
        )
        .is_err());
    }
}
