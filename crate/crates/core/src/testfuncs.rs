//! The test function φ₁(x) = ∫_{S^{n−1}} e^{x·ω} dS_ω, its time-decaying
//! companion ψ₁ = φ₁ e^{−t}, radial data profiles and the data functional
//! C_{f,g} = ∫ (f+g) φ₁ dx.
//!
//! φ₁ is radial, satisfies Δφ₁ = φ₁ and grows like e^{|x|} |x|^{−(n−1)/2}.
//! For n ≥ 2 it reduces to a one-dimensional integral over the polar angle,
//!
//! ```text
//! φ₁(r) = |S^{n−2}| ∫_0^π e^{r cos θ} sin^{n−2} θ dθ,
//! ```
//!
//! and for n = 1 it is e^r + e^{−r}. Internally we evaluate the scaled
//! function e^{−r} φ₁(r) so that large radii do not overflow until the final
//! multiplication.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};

const PHI_REL_TOL: f64 = 1e-10;
/// Largest r for which e^r is finite.
const EXP_LIMIT: f64 = 709.0;

fn check_args(r: f64, n: u32) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("phi1: r must be finite and >= 0, got {r}")));
    }
    if n < 1 {
        return Err(Error::domain("phi1: n must be at least 1"));
    }
    Ok(())
}

/// e^{−r} φ₁(r, n).
pub fn phi1_scaled(r: f64, n: u32) -> Result<f64> {
    check_args(r, n)?;
    if n == 1 {
        return Ok(1.0 + (-2.0 * r).exp());
    }
    let k = (n - 2) as i32;
    // e^{r(cos θ − 1)} < e^{−50} beyond this angle
    let upper = if r > 25.0 {
        (1.0 - 50.0 / r).acos()
    } else {
        std::f64::consts::PI
    };
    let integral = quadrature::adaptive(0.0, upper, PHI_REL_TOL, |theta| {
        (r * (theta.cos() - 1.0)).exp() * theta.sin().powi(k)
    })?;
    Ok(quadrature::sphere_area(n - 2) * integral)
}

/// φ₁(r, n), depending on x only through r = |x|.
pub fn phi1(r: f64, n: u32) -> Result<f64> {
    let scaled = phi1_scaled(r, n)?;
    if r > EXP_LIMIT {
        return Err(Error::Overflow(format!("phi1 at r = {r}")));
    }
    let v = r.exp() * scaled;
    if !v.is_finite() {
        return Err(Error::Overflow(format!("phi1 at r = {r}")));
    }
    Ok(v)
}

/// ψ₁(r, t) = φ₁(r) e^{−t}.
pub fn psi1(r: f64, t: f64, n: u32) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("psi1: t must be >= 0, got {t}")));
    }
    let v = (r - t).exp() * phi1_scaled(r, n)?;
    if !v.is_finite() {
        return Err(Error::Overflow(format!("psi1 at r = {r}, t = {t}")));
    }
    Ok(v)
}

/// Radially symmetric, compactly supported data sampled on an increasing
/// grid starting at r = 0. Values between samples come from local cubic
/// (four-point Lagrange) interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    r: Vec<f64>,
    values: Vec<f64>,
    support_radius: f64,
    dimension: u32,
}

impl RadialProfile {
    pub fn new(samples: Vec<(f64, f64)>, support_radius: f64, dimension: u32) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::domain("RadialProfile: need at least 4 samples"));
        }
        if dimension < 1 {
            return Err(Error::domain("RadialProfile: dimension must be at least 1"));
        }
        if !(support_radius > 0.0) {
            return Err(Error::domain(format!(
                "RadialProfile: support radius must be positive, got {support_radius}"
            )));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::domain("RadialProfile: grid must start at r = 0"));
        }
        let (r, values): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("RadialProfile: grid must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("RadialProfile: non-finite sample"));
        }
        if let Some((rr, v)) = r.iter().zip(&values).find(|(&rr, &v)| rr > support_radius && v != 0.0) {
            return Err(Error::domain(format!(
                "RadialProfile: value {v} at r = {rr} outside support radius {support_radius}"
            )));
        }
        Ok(Self {
            r,
            values,
            support_radius,
            dimension,
        })
    }

    /// Samples `f` at `nodes + 1` equispaced points of [0, R].
    pub fn from_fn(dimension: u32, support_radius: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = support_radius / nodes as f64;
        let samples = (0..=nodes)
            .map(|i| {
                let r = h * i as f64;
                (r, f(r))
            })
            .collect();
        Self::new(samples, support_radius, dimension)
    }

    /// A (1 − (r/R)²)₊², the default data shape.
    pub fn bump(dimension: u32, support_radius: f64, amplitude: f64, nodes: usize) -> Result<Self> {
        Self::from_fn(dimension, support_radius, nodes, |r| {
            amplitude * bump_shape(r / support_radius)
        })
    }

    /// Constant `amplitude` on [0, R].
    pub fn flat(dimension: u32, support_radius: f64, amplitude: f64, nodes: usize) -> Result<Self> {
        Self::from_fn(dimension, support_radius, nodes, |_| amplitude)
    }

    pub fn zero(dimension: u32, support_radius: f64) -> Result<Self> {
        Self::from_fn(dimension, support_radius, 8, |_| 0.0)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().copied().zip(self.values.iter().copied())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Interpolated value; zero beyond the support radius.
    pub fn value_at(&self, r: f64) -> f64 {
        if r > self.support_radius || r < 0.0 {
            return 0.0;
        }
        let last = *self.r.last().unwrap();
        if r > last {
            return 0.0;
        }
        let i = self.interval(r);
        self.cubic(i, r)
    }

    fn interval(&self, r: f64) -> usize {
        match self.r.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i.min(self.r.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.r.len() - 2),
        }
    }

    // Four-point Lagrange interpolant on the stencil around [r_i, r_{i+1}].
    fn cubic(&self, i: usize, r: f64) -> f64 {
        let n = self.r.len();
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &self.r[start..start + 4];
        let ys = &self.values[start..start + 4];
        let mut acc = 0.0;
        for j in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != j {
                    l *= (r - xs[m]) / (xs[j] - xs[m]);
                }
            }
            acc += ys[j] * l;
        }
        acc
    }

    /// ω_{n−1} ∫_0^R value(r) w(r) r^{n−1} dr, exact for the piecewise-cubic
    /// interpolant up to the accuracy of an 8-point rule per interval.
    pub fn radial_integral(&self, weight: impl Fn(f64) -> f64) -> f64 {
        static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
        let rule = RULE.get_or_init(|| GaussLegendre::new(8));
        let k = self.dimension as i32 - 1;
        let upper = self.support_radius.min(*self.r.last().unwrap());
        let mut total = 0.0;
        for i in 0..self.r.len() - 1 {
            let (a, b) = (self.r[i], self.r[i + 1].min(upper));
            if a >= upper {
                break;
            }
            total += rule.integrate(a, b, |r| self.cubic(i, r) * weight(r) * r.powi(k));
        }
        quadrature::sphere_area(self.dimension - 1) * total
    }

    /// ‖f‖_{L¹(Rⁿ)}.
    pub fn l1_norm(&self) -> f64 {
        self.radial_integral(|_| 1.0).abs().max(0.0)
    }
}

/// (1 − s²)₊².
pub fn bump_shape(s: f64) -> f64 {
    let v = 1.0 - s * s;
    if v > 0.0 {
        v * v
    } else {
        0.0
    }
}

/// C_{f,g} = ∫ (f + g) φ₁ dx.
pub fn c_fg(f: &RadialProfile, g: &RadialProfile) -> Result<f64> {
    if f.dimension != g.dimension {
        return Err(Error::domain(format!(
            "c_fg: profile dimensions differ ({} vs {})",
            f.dimension, g.dimension
        )));
    }
    if !f.is_nonnegative() || !g.is_nonnegative() {
        return Err(Error::domain("c_fg: profiles must be nonnegative"));
    }
    if f.is_zero() && g.is_zero() {
        return Err(Error::domain("c_fg: f and g both vanish identically"));
    }
    let n = f.dimension;
    let radius = f.support_radius.max(g.support_radius);
    if radius > EXP_LIMIT {
        return Err(Error::Overflow(format!("c_fg with support radius {radius}")));
    }
    let phi = |r: f64| r.exp() * phi1_scaled(r, n).unwrap_or(f64::NAN);
    let v = f.radial_integral(phi) + g.radial_integral(phi);
    if !v.is_finite() {
        return Err(Error::Overflow("c_fg".into()));
    }
    Ok(v)
}

/// C_{f,0} ε / (2(1+t)^μ), the lower bound for F₁(t).
pub fn f1_lower_bound(t: f64, mu: f64, eps: f64, c_f0: f64) -> Result<f64> {
    if !(t >= 0.0 && mu > 0.0 && eps > 0.0 && c_f0 > 0.0) {
        return Err(Error::domain(format!(
            "f1_lower_bound: need t >= 0, mu, eps, c_f0 > 0; got t={t}, mu={mu}, eps={eps}, c_f0={c_f0}"
        )));
    }
    Ok(c_f0 * eps / (2.0 * (1.0 + t).powf(mu)))
}
