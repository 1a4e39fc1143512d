//! Integral functionals of a radial solution and the identities they obey.

use serde::{Deserialize, Serialize};

use super::laplacian::Stencil;
use super::{ProblemSpec, SolutionTrace, StepView};
use crate::error::{Error, Result};
use crate::quadrature::{ball_volume, sphere_area};
use crate::testfuncs::phi1_scaled;

/// |u| below this fraction of the sup-norm counts as outside the support.
const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub f0: f64,
    pub f0p: f64,
    pub f1: f64,
    pub sup_norm: f64,
    pub support_radius: f64,
    pub source_integral: f64,
}

pub(crate) struct Tail {
    pub f1: f64,
    pub support: f64,
}

/// Trapezoidal weights ω_{n−1} r_i^{n−1} dr (half weight at r = 0) and the
/// products weight·e^{−r}φ₁(r), filled lazily as the support grows.
pub(crate) struct RadialMeasure {
    n: u32,
    dr: f64,
    pub weight: Vec<f64>,
    phi_weight: Vec<f64>,
}

impl RadialMeasure {
    pub fn new(n: u32, dr: f64, nodes: usize) -> Self {
        let omega = sphere_area(n - 1);
        let k = n as i32 - 1;
        let weight = (0..nodes)
            .map(|i| {
                let end = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
                end * omega * (i as f64 * dr).powi(k) * dr
            })
            .collect();
        Self {
            n,
            dr,
            weight,
            phi_weight: Vec::new(),
        }
    }

    /// Makes e^{−r}φ₁ weights available for nodes `0..len`.
    pub fn ensure(&mut self, len: usize) {
        let len = len.min(self.weight.len());
        for i in self.phi_weight.len()..len {
            let s = phi1_scaled(i as f64 * self.dr, self.n).unwrap_or(0.0);
            self.phi_weight.push(self.weight[i] * s);
        }
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.weight).map(|(a, w)| a * w).sum()
    }

    /// F₁ = Σ w_i e^{−r_i}φ₁(r_i) e^{r_i − t} u_i and the support radius,
    /// scanning down from node `hi`.
    pub fn tail(&self, u: &[f64], t: f64, hi: usize, sup: f64) -> Tail {
        let decay = (-self.dr).exp();
        let mut e = (hi as f64 * self.dr - t).exp();
        let cut = SUPPORT_TOL * sup;
        let mut f1 = 0.0;
        let mut support = None;
        for i in (0..=hi).rev() {
            let v = u[i];
            if support.is_none() && v.abs() > cut && v != 0.0 {
                support = Some(i as f64 * self.dr);
            }
            if e < 1e-300 {
                if support.is_some() {
                    break;
                }
                continue;
            }
            f1 += self.phi_weight[i] * v * e;
            e *= decay;
        }
        Tail {
            f1,
            support: support.unwrap_or(0.0),
        }
    }
}

/// F₀ = ∫u, F₀' = ∫u_t, F₁ = ∫u ψ₁, sup|u|, the numerical support radius
/// and ∫|u|^p for nodal values on r_i = i·dr.
pub fn functionals(u: &[f64], u_t: &[f64], t: f64, spec: &ProblemSpec, dr: f64) -> Result<Functionals> {
    if u.len() != u_t.len() || u.is_empty() {
        return Err(Error::domain(format!(
            "functionals: u and u_t must be non-empty and of equal length ({} vs {})",
            u.len(),
            u_t.len()
        )));
    }
    if !(dr > 0.0) || !(t >= 0.0) {
        return Err(Error::domain(format!(
            "functionals: need dr > 0, t >= 0; got dr={dr}, t={t}"
        )));
    }
    let mut m = RadialMeasure::new(spec.n, dr, u.len());
    m.ensure(u.len());
    let sup = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tail = m.tail(u, t, u.len() - 1, sup);
    Ok(Functionals {
        f0: m.mass(u),
        f0p: m.mass(u_t),
        f1: tail.f1,
        sup_norm: sup,
        support_radius: tail.support,
        source_integral: u.iter().zip(&m.weight).map(|(v, w)| w * v.abs().powf(spec.p)).sum(),
    })
}

fn cumulative_identity(trace: &SolutionTrace, mu: f64, count: usize) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let g = |k: usize| (1.0 + trace.times[k]).powf(mu) * trace.source_integral[k];
    let mut rhs = vec![0.0; count];
    for k in 1..count {
        rhs[k] = rhs[k - 1] + 0.5 * (trace.times[k] - trace.times[k - 1]) * (g(k - 1) + g(k));
    }
    let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = f64::EPSILON * (1.0 + scale);
    (0..count)
        .map(|k| {
            let lhs = (1.0 + trace.times[k]).powf(mu) * trace.f0p[k] - trace.f0p[0];
            (lhs - rhs[k]).abs() / (rhs[k].abs() + floor)
        })
        .fold(0.0, f64::max)
}

/// max_t |(1+t)^μ F₀'(t) − F₀'(0) − ∫₀ᵗ(1+s)^μ ∫|u|^p dx ds| / |RHS|, the time
/// integral taken by the trapezoidal rule over the trace.
pub fn identity_residual(trace: &SolutionTrace, mu: f64) -> f64 {
    cumulative_identity(trace, mu, trace.len())
}

/// [`identity_residual`] restricted to t ≤ t_end.
pub fn identity_residual_until(trace: &SolutionTrace, mu: f64, t_end: f64) -> f64 {
    cumulative_identity(trace, mu, trace.count_until(t_end))
}

/// ∫|w|^p ÷ [vol(Bⁿ)^{1−p} ρ^{−n(p−1)} |∫w|^p] for w supported in a ball of
/// radius ρ. Hölder's inequality makes this at least 1, with equality for
/// constant w.
pub fn holder_ratio(n: u32, p: f64, radius: f64, integral_abs_p: f64, integral: f64) -> f64 {
    let bound = ball_volume(n).powf(1.0 - p) * radius.powf(-(n as f64) * (p - 1.0)) * integral.abs().powf(p);
    integral_abs_p / bound
}

/// Smallest Hölder ratio along a trace, using ρ = t + R. The Liouville
/// factors (1+t)^{μ/2} cancel between numerator and denominator.
pub fn holder_check(trace: &SolutionTrace, spec: &ProblemSpec) -> f64 {
    (0..trace.len())
        .filter(|&k| trace.f0[k] > 0.0)
        .map(|k| {
            holder_ratio(
                spec.n,
                spec.p,
                trace.times[k] + spec.support_radius,
                trace.source_integral[k],
                trace.f0[k],
            )
        })
        .fold(f64::INFINITY, f64::min)
}

/// w = (1+t)^{μ/2} u.
pub fn liouville(u: &[f64], t: f64, mu: f64) -> Vec<f64> {
    let s = (1.0 + t).powf(mu / 2.0);
    u.iter().map(|v| s * v).collect()
}

/// w_t = (1+t)^{μ/2} (u_t + μ u / (2(1+t))).
pub fn liouville_velocity(u: &[f64], u_t: &[f64], t: f64, mu: f64) -> Vec<f64> {
    let s = (1.0 + t).powf(mu / 2.0);
    let c = mu / (2.0 * (1.0 + t));
    u.iter().zip(u_t).map(|(v, vt)| s * (vt + c * v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleResidual {
    pub max_abs: f64,
    /// Largest single term of the transformed equation.
    pub scale: f64,
    pub relative: f64,
}

/// Residual of w_tt − Δw + μ(2−μ)w/(4(1+t)²) − |w|^p/(1+t)^{μ(p−1)/2} at the
/// middle level, by finite differences of the transformed levels. The outer
/// node is skipped.
pub fn liouville_residual(view: &StepView<'_>, n: u32, mu: f64, p: f64) -> LiouvilleResidual {
    let [t0, t1, t2] = view.times;
    let w: Vec<Vec<f64>> = view
        .levels
        .iter()
        .zip(view.times)
        .map(|(u, t)| liouville(u, t, mu))
        .collect();
    let (h0, h1) = (t1 - t0, t2 - t1);
    let m = w[1].len();
    let st = Stencil::new(n, view.dr, m);
    let mass = mu * (2.0 - mu) / (4.0 * (1.0 + t1).powi(2));
    let nl = (1.0 + t1).powf(-mu * (p - 1.0) / 2.0);
    let (mut max_abs, mut scale) = (0.0f64, 0.0f64);
    for i in 0..m - 1 {
        let wtt = 2.0 * ((w[2][i] - w[1][i]) / h1 - (w[1][i] - w[0][i]) / h0) / (h0 + h1);
        let lap = st.apply(&w[1], i);
        let terms = [wtt, lap, mass * w[1][i], nl * w[1][i].abs().powf(p)];
        let res = terms[0] - terms[1] + terms[2] - terms[3];
        max_abs = max_abs.max(res.abs());
        scale = terms.iter().fold(scale, |a, v| a.max(v.abs()));
    }
    LiouvilleResidual {
        max_abs,
        scale,
        relative: if scale > 0.0 { max_abs / scale } else { 0.0 },
    }
}
