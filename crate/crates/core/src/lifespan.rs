//! ε-sweeps of the numerical blow-up time, power-law fits of T(ε) and
//! report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{gamma, lifespan_exponent, wakasugi_exponent, LifespanKind};
use crate::pdesim::{estimate_blowup_time, BlowupEstimate, GridPolicy, ProblemSpec};

/// Caps the number of ε values solved concurrently.
pub const PARALLELISM_ENV: &str = "BLOWUPLAB_PARALLELISM";
/// Relative slope tolerance of the verdict.
pub const DEFAULT_TOLERANCE: f64 = 0.15;
/// Minimum r² of an accepted fit.
pub const MIN_R2: f64 = 0.98;
/// Largest accepted change of the slope when one point is dropped.
pub const MAX_LEAVE_ONE_OUT_CHANGE: f64 = 0.10;
/// Smallest accepted ratio ε_max/ε_min of a sweep.
pub const MIN_EPS_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Why a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictBasis {
    /// |fit − theory| ≤ tolerance·|theory|.
    SlopeMatch,
    /// Fitted decay no steeper than (1 + tolerance)·|theory|: consistent with
    /// an upper bound on T, though not with the asymptotic rate itself.
    UpperBound,
    /// Fitted decay steeper than the bound allows.
    SlopeTooSteep,
    /// T(ε) fails to decrease strictly in ε.
    NonMonotone,
    /// r² below [`MIN_R2`].
    PoorFit,
    /// Dropping one point moves the slope by more than
    /// [`MAX_LEAVE_ONE_OUT_CHANGE`].
    Unstable,
    /// Fewer than three points blew up.
    TooFewPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of ln T on ln ε. The intercept is ln C in
/// T ≈ C ε^slope.
pub fn fit_powerlaw(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::domain(format!(
            "fit_powerlaw: need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if let Some(&(e, t)) = pairs
        .iter()
        .find(|(e, t)| !(*e > 0.0 && *t > 0.0 && e.is_finite() && t.is_finite()))
    {
        return Err(Error::domain(format!(
            "fit_powerlaw: pairs must be positive and finite, got ({e}, {t})"
        )));
    }
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("fit_powerlaw: all eps values coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PowerLawFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeComparison {
    /// −2p(p−1)/γ(p, n+2μ), evaluated whenever γ > 0.
    pub theory: f64,
    /// The older estimate, where its sub-critical condition holds.
    pub wakasugi: Option<f64>,
}

/// Both lifespan exponents at (n, μ, p), without the admissibility gate of
/// [`lifespan_exponent`].
pub fn compare_slopes(n: u32, mu: f64, p: f64) -> Result<SlopeComparison> {
    let g = gamma(p, n as f64 + 2.0 * mu)?;
    if !(g > 0.0) {
        return Err(Error::domain(format!(
            "compare_slopes: gamma(p, n+2mu) = {g} is not positive"
        )));
    }
    Ok(SlopeComparison {
        theory: -2.0 * p * (p - 1.0) / g,
        wakasugi: wakasugi_exponent(n, mu, p).ok(),
    })
}

/// `count` values geometric from `eps_max` down to `eps_min`.
pub fn geometric_eps(eps_max: f64, eps_min: f64, count: usize) -> Result<Vec<f64>> {
    if !(eps_min > 0.0 && eps_max > eps_min && eps_max.is_finite()) || count < 2 {
        return Err(Error::domain(format!(
            "geometric_eps: need 0 < eps_min < eps_max and at least 2 points, got [{eps_min}, {eps_max}] x {count}"
        )));
    }
    let ratio = (eps_min / eps_max).powf(1.0 / (count - 1) as f64);
    let mut v: Vec<f64> = (0..count).map(|k| eps_max * ratio.powi(k as i32)).collect();
    v[count - 1] = eps_min;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub estimate: Option<BlowupEstimate>,
    /// Error message for points without a blow-up estimate.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Base problem; its ε is ignored.
    pub spec_base: ProblemSpec,
    pub grid_policy: Option<GridPolicy>,
    /// Strictly decreasing.
    pub eps_values: Vec<f64>,
    /// Extrapolated blow-up times; `None` where no estimate was obtained.
    #[serde(rename = "T_values")]
    pub t_values: Vec<Option<f64>>,
    pub points: Vec<SweepPoint>,
    pub fit_slope: Option<f64>,
    pub fit_intercept: Option<f64>,
    pub fit_r2: Option<f64>,
    /// [min, max] of the ε values that entered the fit.
    pub fitted_eps_range: Option<[f64; 2]>,
    pub excluded_eps: Vec<f64>,
    pub theory_slope: f64,
    pub wakasugi_slope: Option<f64>,
    pub tolerance: f64,
    /// Strict decrease of T over the fitted points.
    pub monotone: bool,
    /// Largest relative slope change when dropping one fitted point.
    pub leave_one_out_change: Option<f64>,
    pub verdict: Verdict,
    pub verdict_basis: VerdictBasis,
    pub seed: Option<u64>,
    /// Resolved configuration echoed by the caller, if any.
    pub config: Option<BTreeMap<String, String>>,
}

impl SweepResult {
    /// Pairs (ε, T) that entered the fit.
    pub fn fitted_pairs(&self) -> Vec<(f64, f64)> {
        self.eps_values
            .iter()
            .zip(&self.t_values)
            .filter_map(|(&e, t)| t.map(|t| (e, t)))
            .collect()
    }

    /// exp(intercept) ε^slope, if a fit exists.
    pub fn fitted_t(&self, eps: f64) -> Option<f64> {
        Some((self.fit_intercept? + self.fit_slope? * eps.ln()).exp())
    }
}

/// Number of concurrent ε runs: [`PARALLELISM_ENV`] if set to a positive
/// integer, else rayon's default.
pub fn parallelism_from_env() -> Result<Option<usize>> {
    match std::env::var(PARALLELISM_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::domain(format!(
                "{PARALLELISM_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs [`estimate_blowup_time`] for every ε and fits the result.
pub fn sweep(spec_base: &ProblemSpec, eps_list: &[f64], policy: &GridPolicy) -> Result<SweepResult> {
    let parallelism = parallelism_from_env()?;
    let mut result = sweep_with(spec_base, eps_list, DEFAULT_TOLERANCE, parallelism, |spec| {
        estimate_blowup_time(spec, policy)
    })?;
    result.grid_policy = Some(*policy);
    Ok(result)
}

/// Sweep with an arbitrary blow-up time estimator. Numerical failures of
/// single points are recorded and excluded from the fit; domain errors
/// abort the sweep.
pub fn sweep_with<F>(
    spec_base: &ProblemSpec,
    eps_list: &[f64],
    tolerance: f64,
    parallelism: Option<usize>,
    estimator: F,
) -> Result<SweepResult>
where
    F: Fn(&ProblemSpec) -> Result<BlowupEstimate> + Sync,
{
    spec_base.with_eps(1.0).validate()?;
    let eps_values = validate_eps(eps_list)?;
    if !(tolerance > 0.0) {
        return Err(Error::domain(format!(
            "sweep: tolerance must be positive, got {tolerance}"
        )));
    }
    let theory_slope = lifespan_exponent(spec_base.n, spec_base.mu, spec_base.p, LifespanKind::ScaleInvariant)?;
    let wakasugi_slope = wakasugi_exponent(spec_base.n, spec_base.mu, spec_base.p).ok();

    let run = |eps: &f64| -> Result<SweepPoint> {
        match estimator(&spec_base.with_eps(*eps)) {
            Ok(est) => Ok(SweepPoint {
                eps: *eps,
                estimate: Some(est),
                failure: None,
            }),
            Err(e) if e.is_numerical() => Ok(SweepPoint {
                eps: *eps,
                estimate: None,
                failure: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    };
    let points: Vec<SweepPoint> = match parallelism {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::domain(format!("sweep: cannot build thread pool: {e}")))?
            .install(|| eps_values.par_iter().map(run).collect::<Result<_>>())?,
        None => eps_values.par_iter().map(run).collect::<Result<_>>()?,
    };

    let t_values: Vec<Option<f64>> = points.iter().map(|pt| pt.estimate.as_ref().map(|e| e.t_est)).collect();
    let excluded_eps = points
        .iter()
        .filter(|pt| pt.estimate.is_none())
        .map(|pt| pt.eps)
        .collect();
    let mut result = SweepResult {
        spec_base: spec_base.clone(),
        grid_policy: None,
        eps_values,
        t_values,
        points,
        fit_slope: None,
        fit_intercept: None,
        fit_r2: None,
        fitted_eps_range: None,
        excluded_eps,
        theory_slope,
        wakasugi_slope,
        tolerance,
        monotone: true,
        leave_one_out_change: None,
        verdict: Verdict::Inconclusive,
        verdict_basis: VerdictBasis::TooFewPoints,
        seed: None,
        config: None,
    };
    judge(&mut result)?;
    Ok(result)
}

fn validate_eps(eps_list: &[f64]) -> Result<Vec<f64>> {
    if eps_list.len() < 4 {
        return Err(Error::domain(format!(
            "sweep: need at least 4 eps values, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::domain("sweep: eps values must be positive and finite"));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("sweep: eps values must be distinct"));
    }
    if eps[0] / eps[eps.len() - 1] < MIN_EPS_SPAN * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "sweep: eps_max/eps_min must be at least {MIN_EPS_SPAN}, got [{}, {}]",
            eps[eps.len() - 1],
            eps[0]
        )));
    }
    Ok(eps)
}

// Fills the fit fields and the verdict.
fn judge(r: &mut SweepResult) -> Result<()> {
    let pairs = r.fitted_pairs();
    if pairs.len() < 3 {
        r.verdict = Verdict::Inconclusive;
        r.verdict_basis = VerdictBasis::TooFewPoints;
        return Ok(());
    }
    let fit = fit_powerlaw(&pairs)?;
    r.fit_slope = Some(fit.slope);
    r.fit_intercept = Some(fit.intercept);
    r.fit_r2 = Some(fit.r2);
    r.fitted_eps_range = Some([pairs[pairs.len() - 1].0, pairs[0].0]);
    // eps decreasing, so T must increase
    r.monotone = pairs.windows(2).all(|w| w[1].1 > w[0].1);
    if pairs.len() >= 4 {
        let mut worst = 0.0f64;
        for skip in 0..pairs.len() {
            let rest: Vec<(f64, f64)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != skip)
                .map(|(_, p)| *p)
                .collect();
            let s = fit_powerlaw(&rest)?.slope;
            worst = worst.max(((s - fit.slope) / fit.slope).abs());
        }
        r.leave_one_out_change = Some(worst);
    }

    let theory = r.theory_slope;
    let (verdict, basis) = if !r.monotone {
        (Verdict::Inconsistent, VerdictBasis::NonMonotone)
    } else if fit.r2 < MIN_R2 {
        (Verdict::Inconclusive, VerdictBasis::PoorFit)
    } else if r.leave_one_out_change.is_some_and(|c| c >= MAX_LEAVE_ONE_OUT_CHANGE) {
        (Verdict::Inconclusive, VerdictBasis::Unstable)
    } else if ((fit.slope - theory) / theory).abs() <= r.tolerance {
        (Verdict::Consistent, VerdictBasis::SlopeMatch)
    } else if fit.slope.abs() <= (1.0 + r.tolerance) * theory.abs() {
        (Verdict::Consistent, VerdictBasis::UpperBound)
    } else {
        (Verdict::Inconsistent, VerdictBasis::SlopeTooSteep)
    };
    r.verdict = verdict;
    r.verdict_basis = basis;
    Ok(())
}

/// Files written by [`report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub plot: PathBuf,
}

/// Writes `sweep.json` (full result), `sweep.csv` (eps, T, T_fit) and
/// `sweep_plot.dat` (log10 columns) into `dir`. Text files start with the
/// echoed configuration as `#` comment lines.
pub fn report(result: &SweepResult, dir: &Path) -> Result<ReportPaths> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = ReportPaths {
        json: dir.join("sweep.json"),
        csv: dir.join("sweep.csv"),
        plot: dir.join("sweep_plot.dat"),
    };
    let json = serde_json::to_string_pretty(result).map_err(|source| Error::Json {
        path: paths.json.clone(),
        source,
    })?;
    write(&paths.json, json + "\n")?;

    let header = comment_header(result);
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "nan".into());
    let mut csv = header.clone();
    csv.push_str("eps,T,T_fit\n");
    let mut plot = header;
    plot.push_str("# log10_eps log10_T log10_T_fit\n");
    for (&e, &t) in result.eps_values.iter().zip(&result.t_values) {
        let fit = result.fitted_t(e);
        csv.push_str(&format!("{e:e},{},{}\n", fmt(t), fmt(fit)));
        plot.push_str(&format!(
            "{} {} {}\n",
            fmt(Some(e.log10())),
            fmt(t.map(f64::log10)),
            fmt(fit.map(f64::log10))
        ));
    }
    write(&paths.csv, csv)?;
    write(&paths.plot, plot)?;
    Ok(paths)
}

/// Reads a `sweep.json` written by [`report`].
pub fn load_report(path: &Path) -> Result<SweepResult> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn comment_header(result: &SweepResult) -> String {
    let mut s = format!(
        "# verdict = {:?} ({:?}); fit_slope = {}; theory_slope = {}\n",
        result.verdict,
        result.verdict_basis,
        result.fit_slope.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
        result.theory_slope
    );
    if let Some(cfg) = &result.config {
        for (k, v) in cfg {
            s.push_str(&format!("# {k} = {v}\n"));
        }
    }
    s
}

fn write(path: &Path, contents: String) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
