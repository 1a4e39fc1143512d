//! Kato's lemma for F'' ≥ B (t+R)^{−q} |F|^p with a growth floor
//! F(t) ≥ A t^a (t ≥ T₀): if M = (p−1)a/2 − q/2 + 1 > 0 then the lifespan
//! satisfies T < 2^{2/M} T₁ whenever
//! T₁ = max{T₀, F(0)/F'(0), R} ≥ C₀ A^{−(p−1)/(2M)}.
//!
//! The lemma only asserts that some C₀(p, a, q, B) exists. [`calibrate_c0`]
//! turns it into a number from integrated equality-case trajectories.

use serde::{Deserialize, Serialize};

use super::integrator::{BlowupIntegrator, BlowupRun};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoParams {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    /// Growth-floor coefficient A.
    #[serde(rename = "A")]
    pub growth: f64,
    /// Source coefficient B.
    #[serde(rename = "B")]
    pub source: f64,
    /// Time shift R.
    #[serde(rename = "R")]
    pub shift: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "F0_init")]
    pub f_init: f64,
    #[serde(rename = "F0p_init")]
    pub fp_init: f64,
}

impl KatoParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.p > 1.0
            && self.a > 0.0
            && self.q >= 0.0
            && self.growth > 0.0
            && self.source > 0.0
            && self.shift > 0.0
            && self.t0 > 0.0
            && self.f_init >= 0.0
            && self.fp_init > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid Kato parameters: {self:?}")))
        }
    }

    pub fn m(&self) -> f64 {
        (self.p - 1.0) * self.a / 2.0 - self.q / 2.0 + 1.0
    }

    /// max{T₀, F(0)/F'(0), R}, before the C₀ threshold is applied.
    pub fn base_t1(&self) -> f64 {
        self.t0.max(self.f_init / self.fp_init).max(self.shift)
    }

    /// Exponent −(p−1)/(2M) of A in the C₀ threshold.
    pub fn threshold_exponent(&self) -> f64 {
        -(self.p - 1.0) / (2.0 * self.m())
    }
}

/// M = (p−1)a/2 − q/2 + 1.
pub fn kato_m(p: f64, a: f64, q: f64) -> Result<f64> {
    if !(p > 1.0 && a > 0.0 && q >= 0.0) {
        return Err(Error::domain(format!(
            "kato_m: need p > 1, a > 0, q >= 0; got p={p}, a={a}, q={q}"
        )));
    }
    Ok((p - 1.0) * a / 2.0 - q / 2.0 + 1.0)
}

/// Smallest admissible T₁: max{T₀, F(0)/F'(0), R, C₀ A^{−(p−1)/(2M)}}.
///
/// Raising T₀ keeps the growth floor valid, so the threshold can always be
/// met by enlarging T₁.
pub fn kato_t1(params: &KatoParams, c0: f64) -> Result<f64> {
    params.validate()?;
    let m = params.m();
    if !(m > 0.0) {
        return Err(Error::domain(format!("kato_t1: M = {m} <= 0, lemma inapplicable")));
    }
    if !(c0 > 0.0) {
        return Err(Error::domain(format!("kato_t1: C0 must be positive, got {c0}")));
    }
    let threshold = c0 * params.growth.powf(params.threshold_exponent());
    Ok(params.base_t1().max(threshold))
}

/// Upper bound 2^{2/M} T₁ from the lemma.
pub fn kato_bound(params: &KatoParams, c0: f64) -> Result<f64> {
    Ok(2f64.powf(2.0 / params.m()) * kato_t1(params, c0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatoBlowup {
    pub run: BlowupRun,
    /// min over accepted steps with t ≥ T₀ of F(t)/t^a: the largest A for
    /// which the trajectory satisfies the growth floor (∞ if T₀ was never
    /// reached before blow-up).
    pub growth_floor: f64,
}

impl KatoBlowup {
    pub fn blowup_time(&self) -> f64 {
        self.run.blowup_time
    }
}

/// Integrates the extremal case F'' = B (t+R)^{−q} |F|^p from
/// (F(0), F'(0)). Thresholds are `blowup_threshold` × {10⁻⁴, 10⁻², 1}.
pub fn integrate_kato_equality(params: &KatoParams, blowup_threshold: f64, dt0: f64) -> Result<KatoBlowup> {
    let integ = BlowupIntegrator {
        dt0,
        thresholds: vec![blowup_threshold * 1e-4, blowup_threshold * 1e-2, blowup_threshold],
        time_scale_offset: params.shift,
        ..Default::default()
    };
    integrate_kato_with(params, &integ)
}

pub fn integrate_kato_with(params: &KatoParams, integ: &BlowupIntegrator) -> Result<KatoBlowup> {
    if !(params.p > 1.0 && params.q >= 0.0 && params.source > 0.0 && params.shift > 0.0) {
        return Err(Error::domain(format!("invalid Kato ODE parameters: {params:?}")));
    }
    if !(params.f_init >= 0.0 && params.fp_init > 0.0) {
        return Err(Error::domain("Kato ODE needs F(0) >= 0 and F'(0) > 0"));
    }
    let (p, q, b, r) = (params.p, params.q, params.source, params.shift);
    let rhs = move |t: f64, y: &[f64; 2]| [y[1], b * (t + r).powf(-q) * y[0].abs().powf(p)];
    let mut floor = f64::INFINITY;
    let (t0, a) = (params.t0, params.a);
    let run = integ.run(rhs, [params.f_init, params.fp_init], 2.0 / (p - 1.0), |t, y| {
        if t >= t0 {
            floor = floor.min(y[0] / t.powf(a));
        }
    })?;
    Ok(KatoBlowup {
        run,
        growth_floor: floor,
    })
}

/// C₀ making T < 2^{2/M} max{T₁_base, C₀ A^{−(p−1)/(2M)}} hold for every
/// (params, blow-up time) sample of one (p, a, q, B) cell, times the safety
/// factor 1.05. Samples already contained with the base T₁ impose nothing;
/// if none need the threshold the smallest positive requirement is taken
/// from the tightest sample.
pub fn calibrate_c0(samples: &[(KatoParams, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("calibrate_c0: no samples"));
    }
    let cell = |k: &KatoParams| (k.p, k.a, k.q, k.source);
    let first = cell(&samples[0].0);
    if samples.iter().any(|(k, _)| cell(k) != first) {
        return Err(Error::domain(
            "calibrate_c0: samples span more than one (p, a, q, B) cell",
        ));
    }
    let mut need: f64 = 0.0;
    let mut tightest: f64 = 0.0;
    for (k, t_blow) in samples {
        k.validate()?;
        let m = k.m();
        if !(m > 0.0) {
            return Err(Error::domain(format!("calibrate_c0: M = {m} <= 0")));
        }
        let factor = 2f64.powf(2.0 / m);
        // smallest C0 with factor * C0 * A^e > T
        let required = t_blow / factor * k.growth.powf(-k.threshold_exponent());
        tightest = tightest.max(required);
        if factor * k.base_t1() <= *t_blow {
            need = need.max(required);
        }
    }
    let c0 = if need > 0.0 { need } else { tightest };
    Ok(1.05 * c0)
}
