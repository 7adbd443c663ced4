//! Dormand-Prince 5(4) integrator for small complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub type State<const N: usize> = [Complex64; N];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 10_000_000,
        }
    }

    /// Integrates from `(t0, y0)` and returns the state at every time in
    /// `outputs` (nondecreasing, `>= t0`). Steps are clipped so each output
    /// time is hit exactly.
    pub fn integrate<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: State<N>,
        outputs: &[f64],
    ) -> Result<Vec<State<N>>>
    where
        F: Fn(f64, &State<N>) -> State<N>,
    {
        let mut out = Vec::with_capacity(outputs.len());
        let mut stepper = Stepper::new(self, &f, t0, y0);
        for &target in outputs {
            if target < stepper.t {
                return Err(Error::Integration {
                    t: target,
                    reason: "output times must be nondecreasing and >= t0".into(),
                });
            }
            while stepper.t < target {
                stepper.step(&f, Some(target))?;
            }
            out.push(stepper.y);
        }
        Ok(out)
    }

    /// Integrates to `t_end`, recording every accepted step.
    pub fn trajectory<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: State<N>,
        t_end: f64,
    ) -> Result<(Vec<f64>, Vec<State<N>>)>
    where
        F: Fn(f64, &State<N>) -> State<N>,
    {
        let mut times = vec![t0];
        let mut values = vec![y0];
        let mut stepper = Stepper::new(self, &f, t0, y0);
        while stepper.t < t_end {
            stepper.step(&f, Some(t_end))?;
            times.push(stepper.t);
            values.push(stepper.y);
        }
        Ok((times, values))
    }
}

struct Stepper<const N: usize> {
    cfg: Dopri5,
    t: f64,
    y: State<N>,
    k1: State<N>,
    h: f64,
    steps: usize,
}

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

impl<const N: usize> Stepper<N> {
    fn new<F: Fn(f64, &State<N>) -> State<N>>(cfg: &Dopri5, f: &F, t0: f64, y0: State<N>) -> Self {
        let k1 = f(t0, &y0);
        let ynorm = y0
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(cfg.atol);
        let dnorm = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let h = if dnorm > 0.0 {
            (0.01 * ynorm / dnorm).clamp(1e-8, 0.1)
        } else {
            1e-3
        };
        Self {
            cfg: *cfg,
            t: t0,
            y: y0,
            k1,
            h,
            steps: 0,
        }
    }

    fn step<F: Fn(f64, &State<N>) -> State<N>>(&mut self, f: &F, stop: Option<f64>) -> Result<()> {
        loop {
            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                return Err(Error::Integration {
                    t: self.t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            let mut h = self.h;
            let mut clipped = false;
            if let Some(s) = stop {
                if self.t + h >= s {
                    h = s - self.t;
                    clipped = true;
                }
            }
            if h < 1e-14 * self.t.abs().max(1.0) && !clipped {
                return Err(Error::Integration {
                    t: self.t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let t = self.t;
            let y = &self.y;
            let k1 = self.k1;
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y_new);

            let mut sum = 0.0;
            for i in 0..N {
                let e =
                    (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                        * h;
                let sc = self.cfg.atol + self.cfg.rtol * y[i].norm().max(y_new[i].norm());
                sum += (e.re / sc).powi(2) + (e.im / sc).powi(2);
            }
            let err = (sum / (2 * N) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.t = if clipped { stop.unwrap() } else { t + h };
                self.y = y_new;
                self.k1 = k7;
                // Keep the unclipped step proposal so hitting an output time
                // does not shrink later steps.
                self.h = if clipped {
                    self.h.max(h * factor)
                } else {
                    h * factor
                };
                return Ok(());
            }
            self.h = h * factor.min(1.0);
        }
    }
}
