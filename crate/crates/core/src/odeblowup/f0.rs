//! F₀'' + μ F₀'/(1+t) = S(t) with a sampled, nonnegative source.
//!
//! With G = (1+t)^μ F₀' the equation becomes G' = (1+t)^μ S, which is
//! integrated by the trapezoidal rule; F₀ follows by a second trapezoidal
//! pass. Both are second order in the sample spacing and preserve the
//! integrated identity (1+t)^μ F₀'(t) − F₀'(0) = ∫₀ᵗ (1+s)^μ S(s) ds up to
//! the quadrature of its right-hand side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Trace {
    pub times: Vec<f64>,
    pub f0: Vec<f64>,
    pub f0p: Vec<f64>,
}

/// `source[k]` is S(k·dt).
pub fn integrate_f0_system(source: &[f64], dt: f64, mu: f64, f0_init: f64, f0p_init: f64) -> Result<F0Trace> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!(
            "integrate_f0_system: dt must be positive, got {dt}"
        )));
    }
    if !(mu > 0.0) {
        return Err(Error::domain(format!(
            "integrate_f0_system: mu must be positive, got {mu}"
        )));
    }
    if source.is_empty() {
        return Err(Error::domain("integrate_f0_system: empty source"));
    }
    if let Some((k, s)) = source.iter().enumerate().find(|(_, s)| !(**s >= 0.0)) {
        return Err(Error::domain(format!(
            "integrate_f0_system: source sample {k} is {s}, must be nonnegative"
        )));
    }

    let n = source.len();
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let weight = |t: f64| (1.0 + t).powf(mu);
    let mut f0p = Vec::with_capacity(n);
    let mut f0 = Vec::with_capacity(n);
    let mut g = f0p_init;
    f0p.push(f0p_init);
    f0.push(f0_init);
    for k in 1..n {
        g += 0.5 * dt * (weight(times[k - 1]) * source[k - 1] + weight(times[k]) * source[k]);
        let v = g / weight(times[k]);
        let prev = f0[k - 1] + 0.5 * dt * (f0p[k - 1] + v);
        f0p.push(v);
        f0.push(prev);
    }
    Ok(F0Trace { times, f0, f0p })
}

/// max_t |(1+t)^μ F₀'(t) − F₀'(0) − I(t)| for a reference integral I(t).
pub fn identity_residual_against(trace: &F0Trace, mu: f64, reference: impl Fn(f64) -> f64) -> f64 {
    trace
        .times
        .iter()
        .zip(&trace.f0p)
        .map(|(&t, &fp)| ((1.0 + t).powf(mu) * fp - trace.f0p[0] - reference(t)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn homogeneous_solution() {
        let mu = 0.7;
        let tr = integrate_f0_system(&vec![0.0; 2001], 0.005, mu, 1.0, 2.0).unwrap();
        for (&t, &fp) in tr.times.iter().zip(&tr.f0p) {
            assert_relative_eq!(fp, 2.0 * (1.0 + t).powf(-mu), max_relative = 1e-12);
        }
        // F0 = 1 + 2((1+t)^{1-mu} - 1)/(1-mu), trapezoidal error O(dt^2)
        let t = *tr.times.last().unwrap();
        let exact = 1.0 + 2.0 * ((1.0 + t).powf(1.0 - mu) - 1.0) / (1.0 - mu);
        assert_relative_eq!(*tr.f0.last().unwrap(), exact, max_relative = 1e-5);
    }

    #[test]
    fn power_source_closed_form() {
        let mu = 0.5;
        let dt = 0.01;
        let src: Vec<f64> = (0..1001).map(|k| (1.0 + k as f64 * dt).powf(-mu)).collect();
        let tr = integrate_f0_system(&src, dt, mu, 0.0, 0.3).unwrap();
        for (&t, &fp) in tr.times.iter().zip(&tr.f0p) {
            let exact = (1.0 + t).powf(-mu) * (0.3 + t);
            assert!((fp - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn positivity_for_nonnegative_source() {
        let dt = 0.01;
        let src: Vec<f64> = (0..500).map(|k| (k as f64 * dt).sin().powi(2)).collect();
        let tr = integrate_f0_system(&src, dt, 1.3, 0.2, 0.1).unwrap();
        for (k, (&t, &fp)) in tr.times.iter().zip(&tr.f0p).enumerate() {
            assert!(fp >= 0.1 * (1.0 + t).powf(-1.3) * (1.0 - 1e-14));
            assert!(tr.f0[k] >= 0.2);
        }
    }

    #[test]
    fn rejects_negative_source() {
        assert!(integrate_f0_system(&[0.0, -1e-3, 0.0], 0.1, 1.0, 0.0, 1.0).is_err());
        assert!(integrate_f0_system(&[0.0, 1.0], 0.1, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn identity_residual_is_second_order() {
        // S(t) = cos^2 t, ∫_0^t (1+s) cos^2 s ds closed form at mu = 1.
        let mu = 1.0;
        let exact = |t: f64| {
            let (s2, c2) = ((2.0 * t).sin(), (2.0 * t).cos());
            0.5 * (t + t * t / 2.0) + 0.25 * ((1.0 + t) * s2) + 0.125 * (c2 - 1.0)
        };
        let residual = |m: usize| {
            let dt = 4.0 / m as f64;
            let src: Vec<f64> = (0..=m).map(|k| (k as f64 * dt).cos().powi(2)).collect();
            let tr = integrate_f0_system(&src, dt, mu, 0.0, 1.0).unwrap();
            identity_residual_against(&tr, mu, exact)
        };
        let ratio = residual(400) / residual(800);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
