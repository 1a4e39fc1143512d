//! Adaptive RK4 for two-component systems that blow up in finite time.
//!
//! The step is halved whenever the state changes by more than
//! `max_growth` (relative, max-norm) in one step, and doubled again when the
//! change falls below a quarter of that. The first component is monitored
//! against an increasing list of thresholds. Each crossing time is located by
//! interpolating F^{−1/κ}, which is linear in t for a profile
//! F ≈ c (T − t)^{−κ}, and the hits are extrapolated to the blow-up time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdHit {
    pub threshold: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRun {
    pub hits: Vec<ThresholdHit>,
    /// Extrapolated blow-up time.
    pub blowup_time: f64,
    /// |T(last two hits) − T(first two hits)|, a size estimate for the
    /// extrapolation error. Zero with fewer than three thresholds.
    pub extrapolation_spread: f64,
    pub steps: usize,
}

impl BlowupRun {
    /// Time at which the largest threshold was crossed.
    pub fn last_hit_time(&self) -> f64 {
        self.hits.last().map(|h| h.time).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupIntegrator {
    pub dt0: f64,
    pub max_growth: f64,
    pub t_max: f64,
    pub thresholds: Vec<f64>,
    /// Cap on dt relative to (t + time_scale_offset); keeps explicitly
    /// time-dependent coefficients resolved.
    pub max_dt_fraction: f64,
    pub time_scale_offset: f64,
}

impl Default for BlowupIntegrator {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            max_growth: 0.1,
            t_max: 1e6,
            thresholds: vec![1e6, 1e8, 1e10],
            max_dt_fraction: 0.1,
            time_scale_offset: 1.0,
        }
    }
}

fn rk4<F: Fn(f64, &State) -> State>(rhs: &F, t: f64, y: &State, dt: f64) -> State {
    let k1 = rhs(t, y);
    let y2 = [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]];
    let k2 = rhs(t + 0.5 * dt, &y2);
    let y3 = [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]];
    let k3 = rhs(t + 0.5 * dt, &y3);
    let y4 = [y[0] + dt * k3[0], y[1] + dt * k3[1]];
    let k4 = rhs(t + dt, &y4);
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

impl BlowupIntegrator {
    /// Integrates `y' = rhs(t, y)` from `y0` at t = 0 until `y[0]` has crossed
    /// every threshold. `kappa` is the exponent of the expected blow-up
    /// profile of `y[0]`. `observer` sees every accepted (t, y).
    pub fn run<F, O>(&self, rhs: F, y0: State, kappa: f64, mut observer: O) -> Result<BlowupRun>
    where
        F: Fn(f64, &State) -> State,
        O: FnMut(f64, &State),
    {
        if !(self.dt0 > 0.0) || !(self.max_growth > 0.0) || !(kappa > 0.0) {
            return Err(Error::domain(
                "BlowupIntegrator: dt0, max_growth and kappa must be positive",
            ));
        }
        if self.thresholds.is_empty() || self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "BlowupIntegrator: thresholds must be non-empty and increasing",
            ));
        }
        if y0[0] >= self.thresholds[0] {
            return Err(Error::domain(format!(
                "BlowupIntegrator: initial value {} already above first threshold {}",
                y0[0], self.thresholds[0]
            )));
        }

        let mut t = 0.0;
        let mut y = y0;
        let mut dt = self.dt0;
        let mut hits = Vec::with_capacity(self.thresholds.len());
        let mut next = 0;
        let mut steps = 0;
        observer(t, &y);

        while next < self.thresholds.len() {
            if t > self.t_max {
                return Err(Error::NoBlowup(format!(
                    "y stayed below {} up to t_max = {} (y = {:e})",
                    self.thresholds[next], self.t_max, y[0]
                )));
            }
            let cap = self.max_dt_fraction * (t + self.time_scale_offset);
            if dt > cap {
                dt = cap;
            }
            let y_new = rk4(&rhs, t, &y, dt);
            let scale = y[0].abs().max(y[1].abs());
            let change = (y_new[0] - y[0]).abs().max((y_new[1] - y[1]).abs());
            let finite = y_new[0].is_finite() && y_new[1].is_finite();
            if !finite || change > self.max_growth * scale {
                dt *= 0.5;
                if dt < 1e-15 * t.max(1.0) {
                    return Err(Error::StepUnderflow { t, dt });
                }
                continue;
            }

            while next < self.thresholds.len() && y_new[0] >= self.thresholds[next] {
                let h = self.thresholds[next];
                let z = |v: f64| v.powf(-1.0 / kappa);
                let (z0, z1, zh) = (z(y[0].max(f64::MIN_POSITIVE)), z(y_new[0]), z(h));
                let frac = if z0 > z1 {
                    ((z0 - zh) / (z0 - z1)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                hits.push(ThresholdHit {
                    threshold: h,
                    time: t + frac * dt,
                });
                next += 1;
            }

            t += dt;
            y = y_new;
            steps += 1;
            observer(t, &y);
            if change < 0.25 * self.max_growth * scale {
                dt *= 2.0;
            }
        }

        let (blowup_time, extrapolation_spread) = extrapolate_blowup_time(&hits, kappa)?;
        Ok(BlowupRun {
            hits,
            blowup_time,
            extrapolation_spread,
            steps,
        })
    }
}

/// Richardson extrapolation of threshold-crossing times.
///
/// For F ≈ c (T − t)^{−κ} the crossing time of level H is
/// t(H) = T − (c/H)^{1/κ}, so the correction between two levels shrinks by
/// ρ = (H₁/H₂)^{1/κ}. The last two hits give the estimate; the first two
/// (when there are three or more) give a second one whose distance is
/// reported as the spread.
pub fn extrapolate_blowup_time(hits: &[ThresholdHit], kappa: f64) -> Result<(f64, f64)> {
    let pair = |a: &ThresholdHit, b: &ThresholdHit| {
        let rho = (a.threshold / b.threshold).powf(1.0 / kappa);
        b.time + (b.time - a.time) * rho / (1.0 - rho)
    };
    match hits.len() {
        0 => Err(Error::NoBlowup("no threshold was reached".into())),
        1 => Ok((hits[0].time, 0.0)),
        k => {
            let last = pair(&hits[k - 2], &hits[k - 1]);
            let spread = if k >= 3 {
                (last - pair(&hits[0], &hits[1])).abs()
            } else {
                0.0
            };
            Ok((last, spread))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_order_quadratic_blows_up_at_one() {
        let integ = BlowupIntegrator::default();
        let run = integ
            .run(|_, y| [y[0] * y[0], 0.0], [1.0, 0.0], 1.0, |_, _| {})
            .unwrap();
        assert_abs_diff_eq!(run.blowup_time, 1.0, epsilon = 1e-6);
        assert_eq!(run.hits.len(), 3);
        assert!(run.hits.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn exact_hits_extrapolate_exactly() {
        // t(H) = 2 - (3/H)^(1/kappa)
        let kappa = 2.5;
        let hits: Vec<_> = [1e4, 1e6, 1e8]
            .iter()
            .map(|&h| ThresholdHit {
                threshold: h,
                time: 2.0 - (3.0 / h).powf(1.0 / kappa),
            })
            .collect();
        let (t, spread) = extrapolate_blowup_time(&hits, kappa).unwrap();
        assert_abs_diff_eq!(t, 2.0, epsilon = 1e-12);
        assert!(spread < 1e-12);
    }

    #[test]
    fn decaying_solution_reports_no_blowup() {
        let integ = BlowupIntegrator {
            t_max: 50.0,
            ..Default::default()
        };
        let err = integ.run(|_, y| [-y[0], 0.0], [1.0, 0.0], 1.0, |_, _| {});
        assert!(matches!(err, Err(Error::NoBlowup(_))));
    }

    #[test]
    fn rejects_bad_configuration() {
        let integ = BlowupIntegrator {
            thresholds: vec![1e8, 1e6],
            ..Default::default()
        };
        assert!(integ
            .run(|_, y| [y[0] * y[0], 0.0], [1.0, 0.0], 1.0, |_, _| {})
            .is_err());
        let integ = BlowupIntegrator::default();
        assert!(integ
            .run(|_, y| [y[0] * y[0], 0.0], [1e7, 0.0], 1.0, |_, _| {})
            .is_err());
    }
}
