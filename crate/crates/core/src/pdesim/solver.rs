use serde::{Deserialize, Serialize};

use super::diagnostics::RadialMeasure;
use super::laplacian::Stencil;
use super::{BlowupRecord, Functionals, Grid, ProblemSpec, SolutionTrace};
use crate::error::{Error, Result};
use crate::odeblowup::{extrapolate_blowup_time, ThresholdHit};

/// dt is halved when the sup-norm doubles within this many steps (and
/// exceeds its initial value).
const GROWTH_WINDOW: usize = 10;
const TINY: f64 = 1e-250;
/// Blow-up is recorded at the thresholds threshold × these factors.
const THRESHOLD_LADDER: [f64; 3] = [1e-4, 1e-2, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub laplacian: bool,
    pub source: bool,
    /// Accept μ = 0 (undamped) problems.
    pub allow_zero_damping: bool,
    pub adaptive_dt: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            laplacian: true,
            source: true,
            allow_zero_damping: false,
            adaptive_dt: true,
        }
    }
}

impl SolverOptions {
    /// No Laplacian, μ = 0 permitted: with uniform data each node solves
    /// u'' + μ(1+t)^{−β}u' = |u|^p.
    pub fn ode_limit() -> Self {
        Self {
            laplacian: false,
            allow_zero_damping: true,
            ..Self::default()
        }
    }

    pub fn linear() -> Self {
        Self {
            source: false,
            ..Self::default()
        }
    }
}

/// Three consecutive time levels, handed to observers after each step.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub times: [f64; 3],
    pub levels: [&'a [f64]; 3],
    pub dr: f64,
}

pub fn solve(spec: &ProblemSpec, grid: &Grid, blowup_threshold: f64) -> Result<SolutionTrace> {
    solve_with(spec, grid, blowup_threshold, &SolverOptions::default())
}

pub fn solve_with(
    spec: &ProblemSpec,
    grid: &Grid,
    blowup_threshold: f64,
    opts: &SolverOptions,
) -> Result<SolutionTrace> {
    solve_observed(spec, grid, blowup_threshold, opts, |_| {})
}

/// Runs the solver, calling `observer` with every accepted triple of
/// levels (t_{k−1}, t_k, t_{k+1}).
pub fn solve_observed(
    spec: &ProblemSpec,
    grid: &Grid,
    blowup_threshold: f64,
    opts: &SolverOptions,
    mut observer: impl FnMut(StepView<'_>),
) -> Result<SolutionTrace> {
    spec.validate_damping(opts.allow_zero_damping)?;
    grid.validate(spec, opts.laplacian)?;
    if !(blowup_threshold > 0.0) {
        return Err(Error::domain(format!(
            "solve: blow-up threshold must be positive, got {blowup_threshold}"
        )));
    }

    let n_nodes = grid.nodes();
    let dr = grid.dr;
    let r_last = (n_nodes - 1) as f64 * dr;
    let p = spec.p;
    let kappa = 2.0 / (p - 1.0);
    let stencil = Stencil::new(spec.n, dr, n_nodes);
    let mut measure = RadialMeasure::new(spec.n, dr, n_nodes);

    let mut u_prev = vec![0.0; n_nodes];
    let mut u = vec![0.0; n_nodes];
    let mut u_next = vec![0.0; n_nodes];
    let mut v0 = vec![0.0; n_nodes];
    for i in 0..n_nodes - 1 {
        let r = i as f64 * dr;
        u[i] = spec.eps * spec.f.value_at(r);
        v0[i] = spec.eps * spec.g.value_at(r);
    }
    let data_end = ((spec.support_radius / dr).ceil() as usize + 2).min(n_nodes - 1);
    let damping = |t: f64| spec.mu * (1.0 + t).powf(-spec.beta);
    let active_end = |t: f64| -> usize {
        if opts.laplacian {
            (((t + spec.support_radius) / dr).ceil() as usize + precursor_nodes(t, dr)).min(n_nodes - 2)
        } else {
            data_end.min(n_nodes - 2)
        }
    };
    let power = |x: f64| if x != 0.0 { x.abs().powf(p) } else { 0.0 };
    let forced = if opts.source { 1.0 } else { 0.0 };

    let sup0 = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thresholds: Vec<f64> = THRESHOLD_LADDER
        .iter()
        .map(|f| f * blowup_threshold)
        .filter(|&h| h > sup0)
        .collect();
    if thresholds.len() < THRESHOLD_LADDER.len() && sup0 >= blowup_threshold {
        return Err(Error::domain(format!(
            "solve: initial sup-norm {sup0} is already above the blow-up threshold {blowup_threshold}"
        )));
    }

    let mut trace = SolutionTrace::default();
    let mut hits: Vec<ThresholdHit> = Vec::new();

    // Taylor start: u¹ = u⁰ + dt g + dt²/2 (Δu⁰ + |u⁰|^p − d(0) g).
    let mut t = 0.0;
    let mut dt = grid.dt;
    let mut hi = active_end(0.0);
    measure.ensure(hi + 1);
    let d0 = damping(0.0);
    let mut cur = LevelSums::default();
    for i in 0..=hi {
        let lap = if opts.laplacian { stencil.apply(&u, i) } else { 0.0 };
        let src = power(u[i]);
        u_next[i] = u[i] + dt * v0[i] + 0.5 * dt * dt * (lap + forced * src - d0 * v0[i]);
        cur.add(&measure, i, u[i], src);
    }
    let mut next_mass = measure.mass(&u_next[..=hi]);
    let f0p0 = measure.mass(&v0[..=hi]);
    let tail = measure.tail(&u, t, hi, cur.sup);
    trace.push(
        t,
        &Functionals {
            f0: cur.mass,
            f0p: f0p0,
            f1: tail.f1,
            sup_norm: cur.sup,
            support_radius: tail.support,
            source_integral: cur.source,
        },
    );
    let mut prev_mass = cur.mass;
    let mut cur_mass = next_mass;
    // u^{-1} is never needed again; shift levels
    std::mem::swap(&mut u_prev, &mut u);
    std::mem::swap(&mut u, &mut u_next);
    let mut h_prev = dt;
    t += dt;
    let mut sup_history: Vec<f64> = vec![cur.sup];
    let mut sup_cur = u.iter().take(hi + 1).fold(0.0f64, |a, v| a.max(v.abs()));
    check_crossings(&mut hits, &thresholds, cur.sup, sup_cur, 0.0, dt, kappa);
    if hits.len() == thresholds.len() && !thresholds.is_empty() {
        return finish(trace, hits, kappa);
    }

    loop {
        if t > grid.t_max * (1.0 + 1e-12) {
            break;
        }
        if opts.adaptive_dt && sup_history.len() >= GROWTH_WINDOW {
            let old = sup_history[sup_history.len() - GROWTH_WINDOW];
            // focusing at the origin can briefly double a small sup-norm;
            // only growth beyond the initial data counts
            if old > 0.0 && sup_cur >= 2.0 * old && sup_cur > sup0 {
                dt *= 0.5;
                sup_history.clear();
                if dt < 1e-14 * t.max(1.0) {
                    return Err(Error::StepUnderflow { t, dt });
                }
            }
        }
        let h = dt;
        let big_h = h + h_prev;
        let d = damping(t);
        let c_new = 1.0 + 0.5 * d * h;
        let c_lap = 0.5 * big_h * h;
        let c_cur = 1.0 + h / h_prev;
        let c_old = h / h_prev - 0.5 * d * h;

        hi = active_end(t);
        measure.ensure(hi + 1);
        let mut sums = LevelSums::default();
        let mut sup_new = 0.0f64;
        let mut mass_new = 0.0;
        for i in 0..=hi {
            let lap = if opts.laplacian { stencil.apply(&u, i) } else { 0.0 };
            let src = power(u[i]);
            let mut v = (c_lap * (lap + forced * src) + c_cur * u[i] - c_old * u_prev[i]) / c_new;
            // the front precursor decays into subnormals, which are slow
            if v.abs() < TINY {
                v = 0.0;
            }
            u_next[i] = v;
            sums.add(&measure, i, u[i], src);
            sup_new = sup_new.max(v.abs());
            mass_new += measure.weight[i] * v;
        }
        if !sup_new.is_finite() || !sums.mass.is_finite() {
            return Err(Error::NaNDetected {
                last_stable_time: t - h_prev,
            });
        }
        next_mass = mass_new;

        let tail = measure.tail(&u, t, hi, sums.sup);
        if opts.laplacian && tail.support >= r_last - dr {
            return Err(Error::BoundaryContact { t, r_max: grid.r_max });
        }
        trace.push(
            t,
            &Functionals {
                f0: sums.mass,
                f0p: (next_mass - prev_mass) / big_h,
                f1: tail.f1,
                sup_norm: sums.sup,
                support_radius: tail.support,
                source_integral: sums.source,
            },
        );
        observer(StepView {
            times: [t - h_prev, t, t + h],
            levels: [&u_prev[..=hi + 1], &u[..=hi + 1], &u_next[..=hi + 1]],
            dr,
        });

        check_crossings(&mut hits, &thresholds, sup_cur, sup_new, t, h, kappa);
        std::mem::swap(&mut u_prev, &mut u);
        std::mem::swap(&mut u, &mut u_next);
        prev_mass = cur_mass;
        cur_mass = next_mass;
        h_prev = h;
        t += h;
        sup_history.push(sup_cur);
        sup_cur = sup_new;
        if !thresholds.is_empty() && hits.len() == thresholds.len() {
            return finish(trace, hits, kappa);
        }
    }
    Ok(trace)
}

/// Nodes beyond the light cone that are still updated. Discrete fronts
/// carry an Airy-type precursor of width ~ (t dr²)^{1/3}; eight widths
/// keep the truncated tail below ~1e−12 of the sup-norm.
pub(crate) fn precursor_nodes(t: f64, dr: f64) -> usize {
    16 + (8.0 * (t / dr).cbrt()).ceil() as usize
}

fn finish(mut trace: SolutionTrace, hits: Vec<ThresholdHit>, kappa: f64) -> Result<SolutionTrace> {
    let (time_estimate, _) = extrapolate_blowup_time(&hits, kappa)?;
    trace.blowup = Some(BlowupRecord {
        time_estimate,
        threshold_hits: hits,
    });
    Ok(trace)
}

// Crossing times from interpolating sup^{−1/κ}, linear in t for a
// (T − t)^{−κ} profile.
fn check_crossings(hits: &mut Vec<ThresholdHit>, thresholds: &[f64], s0: f64, s1: f64, t: f64, h: f64, kappa: f64) {
    while hits.len() < thresholds.len() && s1 >= thresholds[hits.len()] {
        let level = thresholds[hits.len()];
        let z = |v: f64| v.max(f64::MIN_POSITIVE).powf(-1.0 / kappa);
        let (z0, z1, zh) = (z(s0), z(s1), z(level));
        let frac = if z0 > z1 {
            ((z0 - zh) / (z0 - z1)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        hits.push(ThresholdHit {
            threshold: level,
            time: t + frac * h,
        });
    }
}

#[derive(Debug, Default)]
struct LevelSums {
    mass: f64,
    source: f64,
    sup: f64,
}

impl LevelSums {
    #[inline]
    fn add(&mut self, m: &RadialMeasure, i: usize, u: f64, src: f64) {
        let w = m.weight[i];
        self.mass += w * u;
        self.source += w * src;
        self.sup = self.sup.max(u.abs());
    }
}
