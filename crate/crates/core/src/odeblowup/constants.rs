//! The constant ledger of the lifespan estimate and the ε-dependent
//! quantities derived from it.
//!
//! Notation: s = (n−1)(1−p/2), a = 2 − μp + s + μ/2 (growth exponent of
//! the lower bound for F), q = (n + μ/2)(p−1) (decay exponent of the source
//! coefficient), γ = γ(p, n+2μ), κ = −2p(p−1)/γ.

use serde::{Deserialize, Serialize};

use super::kato::KatoParams;
use super::separable::SeparableOde;
use crate::error::{Error, Result};
use crate::exponents;
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub n: u32,
    pub mu: f64,
    pub p: f64,
    /// Support radius R ≥ 1.
    pub support_radius: f64,
    /// Constant of the linear-solution lower bound; not known in closed form.
    pub c1: f64,
    /// C_{f,0} = ∫ f φ₁ dx.
    pub c_f0: f64,
    /// δ ∈ (0, (p−1)/2); `None` selects the default.
    pub delta: Option<f64>,
    /// Kato constant C₀ (only enters C₅).
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub inputs: ConstantInputs,
    pub gamma: f64,
    pub a: f64,
    pub q: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    /// C₆, C₇, C₈ exist only for 0 < μ < 2.
    #[serde(rename = "C6")]
    pub c6: Option<f64>,
    #[serde(rename = "C7")]
    pub c7: Option<f64>,
    #[serde(rename = "C8")]
    pub c8: Option<f64>,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub delta: f64,
}

/// δ = min((p−1)/4, (Y₀+1)/(2a)) with Y₀ + 1 = γ/4.
pub fn default_delta(p: f64, gamma: f64, a: f64) -> f64 {
    let cap = (p - 1.0) / 4.0;
    if a > 0.0 {
        cap.min(gamma / 4.0 / (2.0 * a))
    } else {
        cap
    }
}

impl ConstantLedger {
    pub fn new(inputs: ConstantInputs) -> Result<Self> {
        let ConstantInputs {
            n,
            mu,
            p,
            support_radius: r,
            c1,
            c_f0,
            delta,
            c0,
        } = inputs;
        if !exponents::admissible(n, mu, p) {
            return Err(Error::domain(format!(
                "constants: (n={n}, mu={mu}, p={p}) is not admissible"
            )));
        }
        if !(r >= 1.0) {
            return Err(Error::domain(format!("constants: R must be >= 1, got {r}")));
        }
        if !(c1 > 0.0 && c_f0 > 0.0 && c0 > 0.0) {
            return Err(Error::domain("constants: C1, C_{f,0} and C0 must be positive"));
        }
        let nf = n as f64;
        let s = (nf - 1.0) * (1.0 - p / 2.0);
        let a = 2.0 - mu * p + s + mu / 2.0;
        let q = (nf + mu / 2.0) * (p - 1.0);
        let gamma = exponents::gamma(p, nf + 2.0 * mu)?;

        let c2 = c1 * c_f0.powf(p) / 2f64.powf((mu + 1.0) * p + s - 1.0);
        let c3 = c2 / 2f64.powf(2.0 + s);
        let c4 = quadrature::ball_volume(n).powf(1.0 - p) * r.powf(-nf * (p - 1.0));
        let c5 = 2f64.powf(8.0 / gamma) * c0 * c3.powf(-2.0 * (p - 1.0) / gamma);
        let x = gamma / 2.0;

        let delta = delta.unwrap_or_else(|| default_delta(p, gamma, a));
        if !(delta > 0.0 && delta < (p - 1.0) / 2.0) {
            return Err(Error::domain(format!(
                "constants: delta = {delta} outside (0, (p-1)/2)"
            )));
        }
        let y = gamma / 4.0 - 1.0 - a * delta;
        if !(y + 1.0 > 0.0) {
            return Err(Error::domain(format!(
                "constants: Y + 1 = {} <= 0; choose a smaller delta",
                y + 1.0
            )));
        }

        let (c6, c7, c8) = if mu > 0.0 && mu < 2.0 {
            let c6 = (mu * (2.0 - mu) * (p + 1.0) / (2.0 * c3.powf(p - 1.0) * c4)).powf(1.0 / x);
            let c7 = delta * c3.powf((p - 1.0) / 2.0) / (y + 1.0) * (c4 / (2.0 * (p + 1.0))).sqrt();
            let c8 = (1.0 + 1.0 / (c7 * c6.powf(gamma / 4.0))).powf(1.0 / (y + 1.0)) * c6;
            (Some(c6), Some(c7), Some(c8))
        } else {
            (None, None, None)
        };

        let ledger = Self {
            inputs: ConstantInputs {
                delta: Some(delta),
                ..inputs
            },
            gamma,
            a,
            q,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            c8,
            x,
            y,
            delta,
        };
        let all = [c2, c3, c4, c5].into_iter().chain([c6, c7, c8].into_iter().flatten());
        for v in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "constants: non-positive or non-finite constant in {ledger:?}"
                )));
            }
        }
        Ok(ledger)
    }

    /// κ = −2p(p−1)/γ(p, n+2μ).
    pub fn kappa(&self) -> f64 {
        let p = self.inputs.p;
        -2.0 * p * (p - 1.0) / self.gamma
    }

    fn lemma_constants(&self) -> Result<(f64, f64, f64)> {
        match (self.c6, self.c7, self.c8) {
            (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
            _ => Err(Error::domain(format!(
                "C6..C8 need 0 < mu < 2, got mu = {}",
                self.inputs.mu
            ))),
        }
    }

    /// Lower bound C₃ ε^p t^a for F(t) = (1+t)^{μ/2} F₀(t), valid for t ≥ 2.
    pub fn f_lower_bound(&self, eps: f64, t: f64) -> f64 {
        self.c3 * eps.powf(self.inputs.p) * t.powf(self.a)
    }

    /// T₁ = C₆ ε^κ.
    pub fn lemma_t1(&self, eps: f64) -> Result<f64> {
        let (c6, _, _) = self.lemma_constants()?;
        Ok(c6 * eps.powf(self.kappa()))
    }

    /// C₈ ε^κ.
    pub fn lifespan_bound(&self, eps: f64) -> Result<f64> {
        let (_, _, c8) = self.lemma_constants()?;
        Ok(c8 * eps.powf(self.kappa()))
    }

    /// C₅ ε^κ, the bound of the Kato route.
    pub fn kato_lifespan_bound(&self, eps: f64) -> f64 {
        self.c5 * eps.powf(self.kappa())
    }

    /// Kato data for the theorem: A = C₃ε^p, B = C₄, T₀ = 2,
    /// F(0) = ‖f‖₁ε, F'(0) = (μ/2 ‖f‖₁ + ‖g‖₁)ε.
    pub fn kato_instance(&self, eps: f64, f_l1: f64, g_l1: f64) -> KatoParams {
        let ConstantInputs {
            mu, p, support_radius, ..
        } = self.inputs;
        KatoParams {
            p,
            a: self.a,
            q: self.q,
            growth: self.c3 * eps.powf(p),
            source: self.c4,
            shift: support_radius,
            t0: 2.0,
            f_init: f_l1 * eps,
            fp_init: (mu / 2.0 * f_l1 + g_l1) * eps,
        }
    }

    /// C₀ A^{−(p−1)/(2M)} for A = C₃ ε^p; M = γ/4 makes this C₀C₃^{−2(p−1)/γ}ε^κ.
    pub fn kato_threshold_time(&self, eps: f64) -> f64 {
        let p = self.inputs.p;
        let m = self.gamma / 4.0;
        self.inputs.c0 * (self.c3 * eps.powf(p)).powf(-(p - 1.0) / (2.0 * m))
    }

    /// The δ-form separable ODE F' = c t^{Y} F^{1+δ} with
    /// c = C₃^{(p−1)/2−δ} √(C₄/(2(p+1))) ε^{p((p−1)/2−δ)}, started at
    /// T₁ = C₆ε^κ from F(T₁) = C₃ε^p T₁^a. Returns (T₁, F(T₁), ODE).
    pub fn separable_instance(&self, eps: f64) -> Result<(f64, f64, SeparableOde)> {
        let p = self.inputs.p;
        let t1 = self.lemma_t1(eps)?;
        let f_t1 = self.f_lower_bound(eps, t1);
        let power = (p - 1.0) / 2.0 - self.delta;
        let c = self.c3.powf(power) * (self.c4 / (2.0 * (p + 1.0))).sqrt() * eps.powf(p * power);
        let ode = SeparableOde {
            c,
            k: -self.y,
            exponent: 1.0 + self.delta,
            shift: 0.0,
        };
        Ok((t1, f_t1, ode))
    }

    /// Blow-up time of [`Self::separable_instance`].
    pub fn separable_pipeline_time(&self, eps: f64) -> Result<f64> {
        let (t1, f_t1, ode) = self.separable_instance(eps)?;
        ode.blowup_time(f_t1, t1)
    }

    /// C₃ε^p T₁^a ≥ 2‖f‖₁ε at T₁ = C₆ε^κ, i.e. F(T₁) ≥ 2F(0).
    pub fn restriction2_holds(&self, eps: f64, f_l1: f64) -> Result<bool> {
        let t1 = self.lemma_t1(eps)?;
        Ok(self.f_lower_bound(eps, t1) >= 2.0 * f_l1 * eps)
    }

    /// Side conditions used by the argument at amplitude ε.
    pub fn side_conditions_hold(&self, eps: f64, f_l1: f64, g_l1: f64) -> Result<bool> {
        let kato = self.kato_instance(eps, f_l1, g_l1);
        let t0 = self.kato_threshold_time(eps);
        let mut ok = t0 >= 2f64.max(kato.f_init / kato.fp_init);
        if self.c6.is_some() {
            ok &= self.lemma_t1(eps)? >= 2.0 && self.restriction2_holds(eps, f_l1)?;
        }
        Ok(ok)
    }

    /// Largest ε in [1e−12, 1e3] for which all side conditions hold,
    /// located by bisection in log ε. This is an empirical ε₀, not the
    /// (unquantified) one of the theorem.
    pub fn epsilon_zero(&self, f_l1: f64, g_l1: f64) -> Result<f64> {
        let holds = |e: f64| self.side_conditions_hold(e, f_l1, g_l1);
        let (mut lo, mut hi) = (1e-12f64, 1e3f64);
        if !holds(lo)? {
            return Err(Error::domain("epsilon_zero: side conditions fail even at eps = 1e-12"));
        }
        if holds(hi)? {
            return Ok(hi);
        }
        for _ in 0..200 {
            let mid = (lo.ln() + hi.ln()) / 2.0;
            let mid = mid.exp();
            if holds(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-12 {
                break;
            }
        }
        Ok(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn headline() -> ConstantInputs {
        ConstantInputs {
            n: 3,
            mu: 0.5,
            p: 1.8,
            support_radius: 1.0,
            c1: 1.0,
            c_f0: 1.0,
            delta: None,
            c0: 1.0,
        }
    }

    #[test]
    fn headline_constants_independent_rederivation() {
        let l = ConstantLedger::new(headline()).unwrap();
        // hand-expanded for n=3, mu=0.5, p=1.8:
        // s = 2*0.1 = 0.2; a = 2 - 0.9 + 0.2 + 0.25 = 1.55; q = 3.25*0.8 = 2.6
        assert_relative_eq!(l.a, 1.55, max_relative = 1e-14);
        assert_relative_eq!(l.q, 2.6, max_relative = 1e-14);
        assert_relative_eq!(l.gamma, 1.28, max_relative = 1e-12);
        let c2 = 1.0 / 2f64.powf(1.5 * 1.8 + 0.2 - 1.0);
        assert_relative_eq!(l.c2, c2, max_relative = 1e-14);
        let c3 = c2 / 2f64.powf(2.2);
        assert_relative_eq!(l.c3, c3, max_relative = 1e-14);
        let c4 = (4.0 * PI / 3.0).powf(-0.8);
        assert_relative_eq!(l.c4, c4, max_relative = 1e-14);
        // delta = min(0.2, 0.32/3.1)
        assert_relative_eq!(l.delta, 0.32 / 3.1, max_relative = 1e-14);
        let y = 0.32 - 1.0 - 1.55 * l.delta;
        assert_relative_eq!(l.y, y, max_relative = 1e-13);
        let c6 = (0.5 * 1.5 * 2.8 / (2.0 * c3.powf(0.8) * c4)).powf(1.0 / 0.64);
        assert_relative_eq!(l.c6.unwrap(), c6, max_relative = 1e-12);
        let c7 = l.delta * c3.powf(0.4) / (y + 1.0) * (c4 / 5.6).sqrt();
        assert_relative_eq!(l.c7.unwrap(), c7, max_relative = 1e-12);
        let c8 = (1.0 + 1.0 / (c7 * c6.powf(0.32))).powf(1.0 / (y + 1.0)) * c6;
        assert_relative_eq!(l.c8.unwrap(), c8, max_relative = 1e-12);
        for v in [l.c2, l.c3, l.c4, l.c5, c6, c7, c8] {
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn y_forms_agree() {
        let l = ConstantLedger::new(headline()).unwrap();
        let p = 1.8;
        let first = ((p - 1.0) / 2.0 - l.delta) * l.a - (3.0 + 0.25) * (p - 1.0) / 2.0;
        assert_relative_eq!(first, l.y, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut i = headline();
        i.delta = Some(0.5);
        assert!(ConstantLedger::new(i).is_err());
        let mut i = headline();
        i.support_radius = 0.5;
        assert!(ConstantLedger::new(i).is_err());
        let mut i = headline();
        i.p = 2.0;
        assert!(ConstantLedger::new(i).is_err());
        // Y + 1 <= 0 for a delta that is allowed by (p-1)/2 but too large
        let mut i = headline();
        i.delta = Some(0.39);
        assert!(ConstantLedger::new(i).is_err());
    }

    #[test]
    fn mu_at_least_two_has_no_lemma_constants() {
        // n = 5: mu0 = 16/7 > 2
        let i = ConstantInputs {
            n: 5,
            mu: 2.1,
            p: 1.41,
            ..headline()
        };
        assert!(exponents::admissible(5, 2.1, 1.41));
        let l = ConstantLedger::new(i).unwrap();
        assert!(l.c6.is_none());
        assert!(l.lemma_t1(0.1).is_err());
    }

    #[test]
    fn kato_threshold_scales_with_kappa() {
        let l = ConstantLedger::new(headline()).unwrap();
        let r = l.kato_threshold_time(0.01) / l.kato_threshold_time(0.1);
        assert_relative_eq!(r.ln() / 0.1f64.ln(), l.kappa(), max_relative = 1e-12);
        // 2^{2/M} times the threshold is C5 eps^kappa
        let bound = 2f64.powf(2.0 / (l.gamma / 4.0)) * l.kato_threshold_time(0.05);
        assert_relative_eq!(bound, l.kato_lifespan_bound(0.05), max_relative = 1e-12);
    }

    #[test]
    fn separable_pipeline_meets_c8() {
        let l = ConstantLedger::new(headline()).unwrap();
        for k in 0..10 {
            let eps = 0.1 * 10f64.powf(-(k as f64) / 9.0);
            let t = l.separable_pipeline_time(eps).unwrap();
            let bound = l.lifespan_bound(eps).unwrap();
            assert!(t <= bound * (1.0 + 1e-9), "eps {eps}: {t} > {bound}");
            assert!(t > l.lemma_t1(eps).unwrap());
        }
    }

    #[test]
    fn epsilon_zero_is_consistent() {
        let l = ConstantLedger::new(headline()).unwrap();
        let e0 = l.epsilon_zero(0.9, 0.3).unwrap();
        assert!(e0 > 0.0);
        assert!(l.side_conditions_hold(e0, 0.9, 0.3).unwrap());
        assert!(l.side_conditions_hold(e0 * 0.1, 0.9, 0.3).unwrap());
        if e0 < 1e3 {
            assert!(!l.side_conditions_hold(e0 * 1.01, 0.9, 0.3).unwrap());
        }
    }
}
