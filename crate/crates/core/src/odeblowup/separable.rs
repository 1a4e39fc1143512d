//! F' = c (s + t)^{−k} F^m for t ≥ T₁, solved by separation of variables:
//!
//! ```text
//! F(T₁)^{1−m} / (m−1) = c ∫_{T₁}^{T} (s+τ)^{−k} dτ.
//! ```
//!
//! Blow-up happens iff the left side is smaller than the total weight
//! c ∫_{T₁}^∞ (s+τ)^{−k} dτ, which is infinite for k ≤ 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableOde {
    pub c: f64,
    pub k: f64,
    /// Power m > 1 of F.
    pub exponent: f64,
    /// Offset s in the weight (s + t)^{−k}; 1 for (1+t), 0 for t.
    pub shift: f64,
}

impl SeparableOde {
    pub fn blowup_time(&self, f_at_t1: f64, t1: f64) -> Result<f64> {
        let Self {
            c,
            k,
            exponent: m,
            shift: s,
        } = *self;
        if !(c > 0.0 && m > 1.0 && f_at_t1 > 0.0 && t1 >= 0.0 && s >= 0.0 && s + t1 > 0.0) {
            return Err(Error::domain(format!(
                "separable ODE: need c > 0, m > 1, F(T1) > 0, T1 >= 0, s + T1 > 0; got {self:?}, F(T1)={f_at_t1}, T1={t1}"
            )));
        }
        // required weight integral ∫_{T1}^{T} (s+τ)^{-k} dτ
        let need = f_at_t1.powf(1.0 - m) / ((m - 1.0) * c);
        let base = s + t1;
        if (k - 1.0).abs() < 1e-14 {
            return Ok(base * need.exp() - s);
        }
        let one_minus_k = 1.0 - k;
        let lhs = base.powf(one_minus_k) + one_minus_k * need;
        if k > 1.0 && !(lhs > 0.0) {
            let total = base.powf(one_minus_k) / (k - 1.0);
            return Err(Error::NoBlowup(format!(
                "weight integral {total:e} is exhausted before the required {need:e}"
            )));
        }
        let t = lhs.powf(1.0 / one_minus_k) - s;
        if !t.is_finite() {
            return Err(Error::Overflow("separable blow-up time".into()));
        }
        Ok(t)
    }
}

/// F' = c (1+t)^{−k} F^{(p+1)/2}.
pub fn separable_blowup_time(c: f64, k: f64, p: f64, f_at_t1: f64, t1: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!(
            "separable_blowup_time: p must exceed 1, got {p}"
        )));
    }
    SeparableOde {
        c,
        k,
        exponent: (p + 1.0) / 2.0,
        shift: 1.0,
    }
    .blowup_time(f_at_t1, t1)
}
