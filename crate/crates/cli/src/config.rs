//! Flat `section.key = value` configuration files.
//!
//! ```text
//! # comment
//! problem.n = 3
//! problem.mu = 0.5
//! grid.t_max = 400
//! ```
//!
//! Every key has a default; unknown keys are rejected. [`RunConfig::resolved`]
//! returns the complete key set after defaults, which every output embeds.
//! A JSON artifact with a `config` object is accepted as input as well, so
//! runs can be repeated from their outputs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use blowuplab::lifespan::geometric_eps;
use blowuplab::pdesim::{Grid, GridPolicy, ProblemSpec, SolverOptions};
use blowuplab::testfuncs::RadialProfile;

/// Key, default, description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem.n", "3", "space dimension"),
    ("problem.mu", "0.5", "damping coefficient"),
    ("problem.beta", "1", "damping decay exponent"),
    ("problem.p", "1.8", "power of the nonlinearity"),
    ("problem.eps", "0.5", "data amplitude"),
    ("problem.R", "1", "support radius of the data"),
    ("problem.data", "bump", "data shape: bump or flat"),
    ("problem.amplitude_f", "4", "amplitude of f"),
    ("problem.amplitude_g", "4", "amplitude of g"),
    ("grid.dr", "auto", "radial step; auto means R/200"),
    ("grid.cfl", "0.5", "dt/dr"),
    ("grid.t_max", "100", "final time"),
    ("grid.blowup_threshold", "1e6", "sup-norm treated as blow-up"),
    ("grid.levels", "3", "resolution levels of blow-up estimates"),
    ("grid.max_spread", "0.1", "largest relative disagreement between levels"),
    ("grid.laplacian", "true", "include the Laplacian"),
    ("grid.source", "true", "include the |u|^p source"),
    ("grid.adaptive_dt", "true", "halve dt while the sup-norm grows fast"),
    ("grid.allow_zero_damping", "false", "accept mu = 0"),
    ("sweep.eps_min", "0.1", "smallest eps"),
    ("sweep.eps_max", "0.8", "largest eps"),
    ("sweep.points", "8", "number of eps values"),
    ("sweep.tolerance", "0.15", "relative slope tolerance"),
    ("output.dir", ".", "output directory"),
    ("output.pretty", "true", "indent JSON output"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let parsed = if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::parse(&text)
        };
        parsed.with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(cfg)
    }

    fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text)?;
        let map = doc
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| anyhow!("JSON input has no `config` object"))?;
        let mut cfg = Self::default();
        for (k, v) in map {
            let v = v
                .as_str()
                .ok_or_else(|| anyhow!("config value of {k} is not a string"))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => bail!("unknown config key `{key}`"),
        }
    }

    fn raw(&self, key: &str) -> &str {
        &self.values[key]
    }

    fn num(&self, key: &str) -> Result<f64> {
        let v = self.raw(key);
        v.parse::<f64>()
            .map_err(|_| anyhow!("config key `{key}`: expected a number, got {v:?}"))
    }

    fn int(&self, key: &str) -> Result<usize> {
        let v = self.raw(key);
        v.parse::<usize>()
            .map_err(|_| anyhow!("config key `{key}`: expected a non-negative integer, got {v:?}"))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            v => bail!("config key `{key}`: expected true or false, got {v:?}"),
        }
    }

    /// All keys with defaults applied and `auto` values replaced by the
    /// numbers they stand for.
    pub fn resolved(&self) -> Result<BTreeMap<String, String>> {
        let mut out = self.values.clone();
        out.insert("grid.dr".into(), self.dr()?.to_string());
        Ok(out)
    }

    fn dr(&self) -> Result<f64> {
        match self.raw("grid.dr") {
            "auto" => Ok(self.num("problem.R")? / 200.0),
            _ => self.num("grid.dr"),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let n = self.int("problem.n")? as u32;
        let (mu, beta, p, eps, r) = (
            self.num("problem.mu")?,
            self.num("problem.beta")?,
            self.num("problem.p")?,
            self.num("problem.eps")?,
            self.num("problem.R")?,
        );
        let amps = [self.num("problem.amplitude_f")?, self.num("problem.amplitude_g")?];
        let spec = match self.raw("problem.data") {
            "bump" => ProblemSpec::from_bumps(n, mu, beta, p, eps, r, amps)?,
            "flat" => ProblemSpec {
                n,
                mu,
                beta,
                p,
                eps,
                f: RadialProfile::flat(n, r, amps[0], 16)?,
                g: RadialProfile::flat(n, r, amps[1], 16)?,
                support_radius: r,
            },
            v => bail!("config key `problem.data`: expected bump or flat, got {v:?}"),
        };
        Ok(spec)
    }

    pub fn options(&self) -> Result<SolverOptions> {
        Ok(SolverOptions {
            laplacian: self.flag("grid.laplacian")?,
            source: self.flag("grid.source")?,
            allow_zero_damping: self.flag("grid.allow_zero_damping")?,
            adaptive_dt: self.flag("grid.adaptive_dt")?,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(
            self.dr()?,
            self.num("grid.cfl")?,
            self.num("grid.t_max")?,
            self.num("problem.R")?,
        ))
    }

    pub fn blowup_threshold(&self) -> Result<f64> {
        self.num("grid.blowup_threshold")
    }

    pub fn grid_policy(&self) -> Result<GridPolicy> {
        Ok(GridPolicy {
            dr: self.dr()?,
            cfl: self.num("grid.cfl")?,
            t_max: self.num("grid.t_max")?,
            levels: self.int("grid.levels")?,
            blowup_threshold: self.blowup_threshold()?,
            max_spread: self.num("grid.max_spread")?,
            options: self.options()?,
        })
    }

    pub fn eps_values(&self) -> Result<Vec<f64>> {
        Ok(geometric_eps(
            self.num("sweep.eps_max")?,
            self.num("sweep.eps_min")?,
            self.int("sweep.points")?,
        )?)
    }

    pub fn tolerance(&self) -> Result<f64> {
        self.num("sweep.tolerance")
    }

    pub fn out_dir(&self) -> &str {
        self.raw("output.dir")
    }

    pub fn pretty(&self) -> Result<bool> {
        self.flag("output.pretty")
    }
}
