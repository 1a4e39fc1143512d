//! Critical exponents, damping regimes and predicted lifespan exponents.
//!
//! All quantities are closed-form. `d` denotes a (possibly non-integer)
//! effective dimension, as the Strauss exponent is evaluated at the shifted
//! dimension `n + 2μ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// γ(p, d) = 2 + (d+1)p − (d−1)p².
pub fn gamma(p: f64, d: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("gamma: p must exceed 1, got {p}")));
    }
    if !(d >= 1.0) {
        return Err(Error::domain(format!("gamma: d must be at least 1, got {d}")));
    }
    Ok(gamma_unchecked(p, d))
}

#[inline]
pub(crate) fn gamma_unchecked(p: f64, d: f64) -> f64 {
    2.0 + (d + 1.0) * p - (d - 1.0) * p * p
}

/// Strauss exponent p₀(d), the positive root of γ(·, d).
pub fn strauss_exponent(d: f64) -> Result<f64> {
    if !(d > 1.0) {
        return Err(Error::domain(format!("strauss_exponent: d must exceed 1, got {d}")));
    }
    Ok((d + 1.0 + (d * d + 10.0 * d - 7.0).sqrt()) / (2.0 * (d - 1.0)))
}

/// Fujita exponent p_F(n) = 1 + 2/n.
pub fn fujita_exponent(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("fujita_exponent: n must be at least 1"));
    }
    Ok(1.0 + 2.0 / n as f64)
}

/// max{p_F(n), p₀(n+2)}: the critical exponent of the massless case μ = 2.
pub fn critical_exponent_mu2(n: u32) -> Result<f64> {
    let pf = fujita_exponent(n)?;
    let p0 = strauss_exponent(n as f64 + 2.0)?;
    Ok(pf.max(p0))
}

/// μ₀(n) = (n² + n + 2) / (2(n+2)).
pub fn mu_threshold(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("mu_threshold: n must be at least 2, got {n}")));
    }
    let n = n as f64;
    Ok((n * n + n + 2.0) / (2.0 * (n + 2.0)))
}

/// Regime of the damping coefficient μ/(1+t)^β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DampingRegime {
    Overdamping,
    Effective,
    ScaleInvariant {
        #[serde(rename = "nonEffective")]
        non_effective: bool,
    },
    Scattering,
}

pub fn classify_damping(beta: f64, mu: f64) -> Result<DampingRegime> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!(
            "classify_damping: mu must be positive, got {mu}"
        )));
    }
    if beta.is_nan() {
        return Err(Error::domain("classify_damping: beta is NaN"));
    }
    Ok(if beta < -1.0 {
        DampingRegime::Overdamping
    } else if beta < 1.0 {
        DampingRegime::Effective
    } else if beta == 1.0 {
        // Only μ ∈ (0,1) is known to be non-effective; nothing is claimed for μ ≥ 1.
        DampingRegime::ScaleInvariant {
            non_effective: mu < 1.0,
        }
    } else {
        DampingRegime::Scattering
    })
}

/// Whether (n, μ, p) lies in the blow-up range of the lifespan theorem:
/// n ≥ 2, 0 < μ < μ₀(n) and p_F(n) ≤ p < p₀(n+2μ).
pub fn admissible(n: u32, mu: f64, p: f64) -> bool {
    if n < 2 || !(mu > 0.0) || !p.is_finite() {
        return false;
    }
    let (Ok(mu0), Ok(pf), Ok(p0)) = (
        mu_threshold(n),
        fujita_exponent(n),
        strauss_exponent(n as f64 + 2.0 * mu),
    ) else {
        return false;
    };
    mu < mu0 && pf <= p && p < p0
}

/// Which lifespan estimate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LifespanKind {
    /// −2p(p−1)/γ(p, n+2μ), requires [`admissible`].
    #[default]
    ScaleInvariant,
    /// −2p(p−1)/γ(p, n), the prediction for β in the scattering range,
    /// valid for 1 < p < p₀(n) and any μ > 0.
    Scattering,
}

/// Exponent κ in T ≤ C ε^κ.
pub fn lifespan_exponent(n: u32, mu: f64, p: f64, kind: LifespanKind) -> Result<f64> {
    let g = match kind {
        LifespanKind::ScaleInvariant => {
            if !admissible(n, mu, p) {
                return Err(Error::domain(format!(
                    "lifespan_exponent: (n={n}, mu={mu}, p={p}) outside p_F(n) <= p < p0(n+2mu), 0 < mu < mu0(n), n >= 2"
                )));
            }
            gamma(p, n as f64 + 2.0 * mu)?
        }
        LifespanKind::Scattering => {
            if n < 2 || !(mu > 0.0) {
                return Err(Error::domain(format!(
                    "lifespan_exponent: scattering prediction needs n >= 2 and mu > 0, got n={n}, mu={mu}"
                )));
            }
            gamma(p, n as f64)?
        }
    };
    if !(g > 0.0) {
        return Err(Error::domain(format!(
            "lifespan_exponent: gamma = {g} is not positive at p = {p}"
        )));
    }
    Ok(-2.0 * p * (p - 1.0) / g)
}

/// Earlier test-function lifespan exponents:
/// −(p−1)/(2 − n(p−1)) for 1 < p < p_F(n), μ ≥ 1 and
/// −(p−1)/(2 − (n+μ−1)(p−1)) for 1 < p < 1 + 2/(n+μ−1), 0 < μ < 1.
pub fn wakasugi_exponent(n: u32, mu: f64, p: f64) -> Result<f64> {
    if n < 1 || !(mu > 0.0) || !(p > 1.0) {
        return Err(Error::domain(format!(
            "wakasugi_exponent: need n >= 1, mu > 0, p > 1; got n={n}, mu={mu}, p={p}"
        )));
    }
    let nf = n as f64;
    if mu >= 1.0 && p < fujita_exponent(n)? {
        return Ok(-(p - 1.0) / (2.0 - nf * (p - 1.0)));
    }
    if mu < 1.0 && p < 1.0 + 2.0 / (nf + mu - 1.0) {
        return Ok(-(p - 1.0) / (2.0 - (nf + mu - 1.0) * (p - 1.0)));
    }
    Err(Error::domain(format!(
        "wakasugi_exponent: (n={n}, mu={mu}, p={p}) is not in either sub-critical range"
    )))
}

/// Every exponent and label for one (n, μ, β, p) query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub n: u32,
    pub mu: f64,
    pub beta: f64,
    pub p: f64,
    pub fujita: f64,
    pub strauss_shifted: f64,
    pub gamma_value: f64,
    /// μ₀(n); `None` for n = 1 where it is undefined.
    pub mu0: Option<f64>,
    pub regime: DampingRegime,
    pub admissible: bool,
    /// −2p(p−1)/γ(p, n+2μ) when admissible.
    pub lifespan_exp: Option<f64>,
}

impl ExponentReport {
    pub fn new(n: u32, mu: f64, beta: f64, p: f64) -> Result<Self> {
        let fujita = fujita_exponent(n)?;
        let d = n as f64 + 2.0 * mu;
        let regime = classify_damping(beta, mu)?;
        let strauss_shifted = strauss_exponent(d)?;
        let gamma_value = gamma(p, d)?;
        let mu0 = if n >= 2 { Some(mu_threshold(n)?) } else { None };
        let admissible = admissible(n, mu, p);
        let lifespan_exp = if admissible {
            Some(lifespan_exponent(n, mu, p, LifespanKind::ScaleInvariant)?)
        } else {
            None
        };
        Ok(Self {
            n,
            mu,
            beta,
            p,
            fujita,
            strauss_shifted,
            gamma_value,
            mu0,
            regime,
            admissible,
            lifespan_exp,
        })
    }
}
