//! Gauss–Legendre quadrature and sphere/ball measures.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an m-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_m.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f using this rule on a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// ∫_a^b f on `panels` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// P_m(x) and P_m'(x) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule. Built once; read-only afterwards.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// ∫_a^b f with panel doubling until two successive estimates agree to
/// `rel_tol` (relative, with an absolute floor of `rel_tol * 1e-300`).
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, rel_tol: f64, mut f: F) -> Result<f64> {
    const MAX_PANELS: usize = 1 << 16;
    let rule = gl16();
    let mut panels = 1;
    let mut prev = rule.integrate_panels(a, b, panels, &mut f);
    loop {
        panels *= 2;
        let cur = rule.integrate_panels(a, b, panels, &mut f);
        if !cur.is_finite() {
            return Err(Error::Overflow(format!("quadrature on [{a}, {b}]")));
        }
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return Err(Error::domain(format!(
                "quadrature on [{a}, {b}] did not converge with {panels} panels"
            )));
        }
        prev = cur;
    }
}

/// Surface area |S^k| of the unit k-sphere in R^{k+1}.
pub fn sphere_area(k: u32) -> f64 {
    // |S^k| = 2π/(k−1) |S^{k−2}|, |S^0| = 2, |S^1| = 2π
    let mut a = if k.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = if k.is_multiple_of(2) { 2 } else { 3 };
    while j <= k {
        a *= 2.0 * PI / (j as f64 - 1.0);
        j += 2;
    }
    a
}

/// Volume of the unit ball in R^n.
pub fn ball_volume(n: u32) -> f64 {
    sphere_area(n - 1) / n as f64
}
