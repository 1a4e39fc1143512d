//! Radially symmetric finite-difference solver for
//!
//! ```text
//! u_tt − Δu + μ(1+t)^{−β} u_t = |u|^p,   u(·,0) = εf,  u_t(·,0) = εg,
//! ```
//!
//! together with the integral diagnostics F₀, F₁ and the identities they
//! satisfy. The time stepping is a three-level leapfrog with the damping term
//! averaged over the two outer levels; the Laplacian is the conservative
//! radial stencil of [`radial_laplacian`].

mod diagnostics;
mod estimate;
mod laplacian;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeblowup::ThresholdHit;
use crate::testfuncs::RadialProfile;

pub use diagnostics::{
    functionals, holder_check, holder_ratio, identity_residual, identity_residual_until, liouville, liouville_residual,
    liouville_velocity, Functionals, LiouvilleResidual,
};
pub use estimate::{estimate_blowup_time, BlowupEstimate, GridPolicy, LevelEstimate};
pub use laplacian::{radial_laplacian, stable_cfl};
pub use solver::{solve, solve_observed, solve_with, SolverOptions, StepView};

/// Nodes used to tabulate the default bump profiles.
const PROFILE_NODES: usize = 2000;

/// Amplitude A of the default data f = g = A(1 − (r/R)²)₊². The blow-up time
/// depends on ε and A only through εA.
pub const DEFAULT_BUMP_AMPLITUDE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: u32,
    pub mu: f64,
    pub beta: f64,
    pub p: f64,
    pub eps: f64,
    pub f: RadialProfile,
    pub g: RadialProfile,
    #[serde(rename = "R")]
    pub support_radius: f64,
}

impl ProblemSpec {
    /// β = 1 with f = g = A(1 − (r/R)²)₊².
    pub fn with_bump(n: u32, mu: f64, p: f64, eps: f64, support_radius: f64, amplitude: f64) -> Result<Self> {
        Self::from_bumps(n, mu, 1.0, p, eps, support_radius, [amplitude, amplitude])
    }

    /// f = A_f(1 − (r/R)²)₊², g = A_g(1 − (r/R)²)₊². μ = 0 passes here and is
    /// rejected by the solver unless its options allow it.
    pub fn from_bumps(
        n: u32,
        mu: f64,
        beta: f64,
        p: f64,
        eps: f64,
        support_radius: f64,
        [amp_f, amp_g]: [f64; 2],
    ) -> Result<Self> {
        let spec = Self {
            n,
            mu,
            beta,
            p,
            eps,
            f: RadialProfile::bump(n, support_radius, amp_f, PROFILE_NODES)?,
            g: RadialProfile::bump(n, support_radius, amp_g, PROFILE_NODES)?,
            support_radius,
        };
        spec.validate_damping(true)?;
        Ok(spec)
    }

    /// Spatially constant data f = g = 1 on [0, R]; with the Laplacian
    /// switched off every node follows u'' + μ(1+t)^{−β}u' = |u|^p.
    pub fn uniform(n: u32, mu: f64, p: f64, eps: f64, support_radius: f64) -> Result<Self> {
        let f = RadialProfile::flat(n, support_radius, 1.0, 16)?;
        Ok(Self {
            n,
            mu,
            beta: 1.0,
            p,
            eps,
            g: f.clone(),
            f,
            support_radius,
        })
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_damping(false)
    }

    pub(crate) fn validate_damping(&self, allow_zero_damping: bool) -> Result<()> {
        if self.n < 1 {
            return Err(Error::domain("ProblemSpec: n must be at least 1"));
        }
        let mu_ok = if allow_zero_damping {
            self.mu >= 0.0
        } else {
            self.mu > 0.0
        };
        if !mu_ok || !self.mu.is_finite() {
            return Err(Error::domain(format!(
                "ProblemSpec: mu must be positive, got {}",
                self.mu
            )));
        }
        if !(self.beta >= -1.0) || !self.beta.is_finite() {
            return Err(Error::domain(format!(
                "ProblemSpec: beta = {} lies in the overdamping range beta < -1, which the solver does not treat",
                self.beta
            )));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::domain(format!("ProblemSpec: p must exceed 1, got {}", self.p)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::domain(format!(
                "ProblemSpec: eps must be >= 0, got {}",
                self.eps
            )));
        }
        if !(self.support_radius >= 1.0) || !self.support_radius.is_finite() {
            return Err(Error::domain(format!(
                "ProblemSpec: support radius R must be >= 1, got {}",
                self.support_radius
            )));
        }
        for (name, prof) in [("f", &self.f), ("g", &self.g)] {
            if prof.dimension() != self.n {
                return Err(Error::domain(format!(
                    "ProblemSpec: {name} has dimension {}, expected {}",
                    prof.dimension(),
                    self.n
                )));
            }
            if !prof.is_nonnegative() {
                return Err(Error::domain(format!("ProblemSpec: {name} must be nonnegative")));
            }
            if prof.support_radius() > self.support_radius {
                return Err(Error::domain(format!(
                    "ProblemSpec: {name} is supported up to {} > R = {}",
                    prof.support_radius(),
                    self.support_radius
                )));
            }
        }
        if self.f.is_zero() && self.g.is_zero() {
            return Err(Error::domain("ProblemSpec: f and g both vanish identically"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dr: f64,
    pub dt: f64,
    pub r_max: f64,
    pub t_max: f64,
    pub cfl: f64,
}

impl Grid {
    /// dt = cfl·dr; r_max leaves room beyond the cone t_max + R for the
    /// numerical front precursor.
    pub fn new(dr: f64, cfl: f64, t_max: f64, support_radius: f64) -> Self {
        let pad = (solver::precursor_nodes(t_max, dr) + 5) as f64 * dr;
        Self {
            dr,
            dt: cfl * dr,
            r_max: t_max + support_radius + pad,
            t_max,
            cfl,
        }
    }

    /// dr = R/200, cfl = 0.5.
    pub fn default_for(spec: &ProblemSpec, t_max: f64) -> Self {
        Self::new(spec.support_radius / 200.0, 0.5, t_max, spec.support_radius)
    }

    /// Same extent, dr and dt divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            dr: self.dr / factor,
            dt: self.dt / factor,
            ..*self
        }
    }

    pub fn nodes(&self) -> usize {
        (self.r_max / self.dr).round() as usize + 1
    }

    pub fn validate(&self, spec: &ProblemSpec, laplacian: bool) -> Result<()> {
        let finite = [self.dr, self.dt, self.r_max, self.t_max, self.cfl]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.dr > 0.0) || !(self.dt > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::domain(format!(
                "Grid: dr, dt, t_max must be positive and finite: {self:?}"
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::domain(format!("Grid: cfl must lie in (0, 1), got {}", self.cfl)));
        }
        let limit = self.cfl * self.dr;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt: self.dt, limit });
        }
        if laplacian {
            let stable = stable_cfl(spec.n) * self.dr;
            if self.dt >= stable {
                return Err(Error::CflViolation {
                    dt: self.dt,
                    limit: stable,
                });
            }
        }
        if self.r_max < self.t_max + spec.support_radius {
            return Err(Error::BoundaryContact {
                t: self.r_max - spec.support_radius,
                r_max: self.r_max,
            });
        }
        if self.nodes() < 4 {
            return Err(Error::domain("Grid: fewer than 4 spatial nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub time_estimate: f64,
    pub threshold_hits: Vec<ThresholdHit>,
}

/// Per-step functionals of a run. Entry k describes the solution at
/// `times[k]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub times: Vec<f64>,
    #[serde(rename = "F0")]
    pub f0: Vec<f64>,
    #[serde(rename = "F0p")]
    pub f0p: Vec<f64>,
    #[serde(rename = "F1")]
    pub f1: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub support_radius: Vec<f64>,
    pub source_integral: Vec<f64>,
    pub blowup: Option<BlowupRecord>,
}

impl SolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub(crate) fn push(&mut self, t: f64, v: &Functionals) {
        self.times.push(t);
        self.f0.push(v.f0);
        self.f0p.push(v.f0p);
        self.f1.push(v.f1);
        self.sup_norm.push(v.sup_norm);
        self.support_radius.push(v.support_radius);
        self.source_integral.push(v.source_integral);
    }

    /// Number of leading entries with t ≤ t_end.
    pub fn count_until(&self, t_end: f64) -> usize {
        self.times.partition_point(|&t| t <= t_end)
    }

    /// End of the pre-blow-up window: `fraction` of the blow-up estimate, or
    /// the last recorded time when the run did not blow up.
    pub fn window_end(&self, fraction: f64) -> f64 {
        match &self.blowup {
            Some(b) => fraction * b.time_estimate,
            None => self.times.last().copied().unwrap_or(0.0),
        }
    }
}
