use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_with, Grid, ProblemSpec, SolverOptions};
use crate::error::{Error, Result};

/// How blow-up times are measured: the finest grid, the number of levels
/// (each coarser one doubles dr and dt) and the solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub dr: f64,
    pub cfl: f64,
    pub t_max: f64,
    pub levels: usize,
    pub blowup_threshold: f64,
    /// Largest tolerated relative disagreement between levels.
    pub max_spread: f64,
    pub options: SolverOptions,
}

impl GridPolicy {
    /// Finest level dr = R/200, cfl = 0.5, three levels.
    pub fn default_for(spec: &ProblemSpec, t_max: f64) -> Self {
        Self {
            dr: spec.support_radius / 200.0,
            cfl: 0.5,
            t_max,
            levels: 3,
            blowup_threshold: 1e6,
            max_spread: 0.1,
            options: SolverOptions::default(),
        }
    }

    /// Grids from coarsest to finest.
    pub fn grids(&self, spec: &ProblemSpec) -> Vec<Grid> {
        (0..self.levels)
            .rev()
            .map(|k| {
                let dr = self.dr * f64::powi(2.0, k as i32);
                Grid::new(dr, self.cfl, self.t_max, spec.support_radius)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub dr: f64,
    pub dt: f64,
    pub blowup_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupEstimate {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    #[serde(rename = "T_lower")]
    pub t_lower: f64,
    #[serde(rename = "T_upper")]
    pub t_upper: f64,
    /// Coarsest first.
    pub levels: Vec<LevelEstimate>,
    /// (max − min)/min over the levels.
    pub spread: f64,
}

/// Blow-up time from runs on `policy.levels` grids, each with half the dr
/// and dt of the previous one. The two finest are Richardson-extrapolated
/// assuming second-order convergence; the bracket spans all level values
/// and the extrapolant.
pub fn estimate_blowup_time(spec: &ProblemSpec, policy: &GridPolicy) -> Result<BlowupEstimate> {
    if policy.levels < 2 {
        return Err(Error::domain(
            "estimate_blowup_time: need at least two resolution levels",
        ));
    }
    let grids = policy.grids(spec);
    let runs: Vec<Result<LevelEstimate>> = grids
        .par_iter()
        .map(|g| {
            let trace = solve_with(spec, g, policy.blowup_threshold, &policy.options)?;
            match trace.blowup {
                Some(b) => Ok(LevelEstimate {
                    dr: g.dr,
                    dt: g.dt,
                    blowup_time: b.time_estimate,
                }),
                None => Err(Error::NoBlowup(format!(
                    "sup-norm stayed below {} up to t_max = {} (dr = {}, eps = {})",
                    policy.blowup_threshold, g.t_max, g.dr, spec.eps
                ))),
            }
        })
        .collect();
    let levels = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let times: Vec<f64> = levels.iter().map(|l| l.blowup_time).collect();
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo;
    if spread > policy.max_spread {
        return Err(Error::NonMonotoneRefinement { spread: 100.0 * spread });
    }
    let (fine, mid) = (times[times.len() - 1], times[times.len() - 2]);
    let t_est = fine + (fine - mid) / 3.0;
    Ok(BlowupEstimate {
        t_est,
        t_lower: lo.min(t_est),
        t_upper: hi.max(t_est),
        levels,
        spread,
    })
}
