mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use blowuplab::exponents::ExponentReport;
use blowuplab::lifespan;
use blowuplab::odeblowup::{
    integrate_f0_system, integrate_kato_equality, kato_bound, separable_blowup_time, KatoParams,
};
use blowuplab::pdesim::{holder_check, identity_residual, solve_with};
use blowuplab::testfuncs::phi1;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "blowuplab",
    version,
    about = "Blow-up experiments for scale-invariant damped wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents and admissibility for (n, mu, beta, p).
    Exponents {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        p: f64,
    },
    /// One radial PDE run: trace CSV plus a JSON sidecar.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Blow-up ODEs.
    Ode(OdeArgs),
    /// Lifespan sweep over a geometric eps grid.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Test-function tables.
    Testfuncs {
        #[command(subcommand)]
        action: TestfuncsAction,
    },
    /// Regenerate sweep CSV and plot files from a sweep.json.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print every config key with its default.
    Defaults,
}

#[derive(Subcommand)]
enum TestfuncsAction {
    /// CSV of (r, phi1(r)).
    Dump {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OdeMode {
    Kato,
    F0,
    Separable,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long, value_enum)]
    mode: OdeMode,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long = "A", default_value_t = 1.0)]
    growth: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    source: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    shift: f64,
    #[arg(long = "T0", default_value_t = 1.0)]
    t0: f64,
    #[arg(long = "F0-init", default_value_t = 1.0)]
    f_init: f64,
    #[arg(long = "F0p-init", default_value_t = 1.0)]
    fp_init: f64,
    #[arg(long = "C0", default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 1e10)]
    threshold: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt0: f64,
    /// f0 mode: damping coefficient.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// f0 mode: time step of the source samples.
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    /// f0 mode: constant source value.
    #[arg(long, conflicts_with = "source_file")]
    source_const: Option<f64>,
    /// f0 mode: number of samples of a constant source.
    #[arg(long, default_value_t = 1001)]
    steps: usize,
    /// f0 mode: file with one source sample per line.
    #[arg(long)]
    source_file: Option<PathBuf>,
    /// separable mode: coefficient c.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// separable mode: weight exponent k.
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    /// separable mode: F(T1).
    #[arg(long, default_value_t = 1.0)]
    f_t1: f64,
    #[arg(long, default_value_t = 0.0)]
    t1: f64,
    /// separable mode: upper bound to check the blow-up time against.
    #[arg(long)]
    bound: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for numerical failures, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<blowuplab::Error>())
        .any(|e| e.is_numerical());
    if numerical {
        2
    } else {
        1
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Exponents { n, mu, beta, p } => {
            let report = ExponentReport::new(n, mu, beta, p)?;
            emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::Simulate { config, out } => simulate(&load(config.as_deref())?, &out)?,
        Command::Ode(args) => emit(None, &(serde_json::to_string_pretty(&ode(&args)?)? + "\n"))?,
        Command::Sweep {
            config,
            eps_min,
            eps_max,
            points,
            out_dir,
        } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(v) = eps_min {
                cfg.set("sweep.eps_min", &v.to_string())?;
            }
            if let Some(v) = eps_max {
                cfg.set("sweep.eps_max", &v.to_string())?;
            }
            if let Some(v) = points {
                cfg.set("sweep.points", &v.to_string())?;
            }
            if let Some(dir) = out_dir {
                cfg.set("output.dir", path_str(&dir)?)?;
            }
            sweep(&cfg)?;
        }
        Command::Testfuncs {
            action: TestfuncsAction::Dump { n, r_max, points, out },
        } => {
            if points < 2 || r_max.is_nan() || r_max <= 0.0 {
                bail!("testfuncs dump: need points >= 2 and r_max > 0");
            }
            let mut csv = String::from("r,phi1\n");
            for i in 0..points {
                let r = r_max * i as f64 / (points - 1) as f64;
                writeln!(csv, "{},{:e}", r, phi1(r, n)?)?;
            }
            emit(out.as_deref(), &csv)?;
        }
        Command::Report { input, out_dir } => {
            let result = lifespan::load_report(&input)?;
            let dir = out_dir.unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
            let paths = lifespan::report(&result, &dir)?;
            println!("{}", paths.csv.display());
        }
        Command::Defaults => {
            for (key, default, doc) in config::KEYS {
                println!("{key} = {default}  # {doc}");
            }
        }
    }
    Ok(())
}

fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn path_str(p: &Path) -> Result<&str> {
    p.to_str()
        .with_context(|| format!("path is not UTF-8: {}", p.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json(cfg: &RunConfig, value: &Value) -> Result<String> {
    Ok(if cfg.pretty()? {
        serde_json::to_string_pretty(value)?
    } else {
        serde_json::to_string(value)?
    } + "\n")
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.problem()?;
    let grid = cfg.grid()?;
    let options = cfg.options()?;
    let trace = solve_with(&spec, &grid, cfg.blowup_threshold()?, &options)?;

    let mut csv = String::from("t,F0,F0p,F1,sup,supp_r,src_int\n");
    for k in 0..trace.len() {
        writeln!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            trace.times[k],
            trace.f0[k],
            trace.f0p[k],
            trace.f1[k],
            trace.sup_norm[k],
            trace.support_radius[k],
            trace.source_integral[k]
        )?;
    }
    write_file(out, &csv)?;

    let sidecar = json!({
        "config": cfg.resolved()?,
        "trace": out.file_name().and_then(|f| f.to_str()),
        "steps": trace.len(),
        "final_time": trace.times.last(),
        "blowup": trace.blowup,
        "diagnostics": {
            "identity_residual": identity_residual(&trace, spec.mu),
            "holder_ratio": holder_check(&trace, &spec),
        },
    });
    let side_path = out.with_extension("json");
    write_file(&side_path, &to_json(cfg, &sidecar)?)?;
    match &trace.blowup {
        Some(b) => println!("blow-up at t = {} ({} steps)", b.time_estimate, trace.len()),
        None => println!("no blow-up before t = {}", grid.t_max),
    }
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.problem()?;
    let eps = cfg.eps_values()?;
    let policy = cfg.grid_policy()?;
    let parallelism = lifespan::parallelism_from_env()?;
    let mut result = lifespan::sweep_with(&spec, &eps, cfg.tolerance()?, parallelism, |s| {
        blowuplab::pdesim::estimate_blowup_time(s, &policy)
    })?;
    result.grid_policy = Some(policy);
    result.config = Some(cfg.resolved()?);
    let paths = lifespan::report(&result, Path::new(cfg.out_dir()))?;
    println!(
        "{:?} ({:?}): slope {} vs theory {}; wrote {}",
        result.verdict,
        result.verdict_basis,
        result.fit_slope.map_or("n/a".into(), |s| format!("{s:.4}")),
        result.theory_slope,
        paths.json.display()
    );
    Ok(())
}

fn ode(args: &OdeArgs) -> Result<Value> {
    match args.mode {
        OdeMode::Kato => {
            let params = KatoParams {
                p: args.p.context("--p is required")?,
                a: args.a,
                q: args.q,
                growth: args.growth,
                source: args.source,
                shift: args.shift,
                t0: args.t0,
                f_init: args.f_init,
                fp_init: args.fp_init,
            };
            let bound = kato_bound(&params, args.c0)?;
            let run = integrate_kato_equality(&params, args.threshold, args.dt0)?;
            let t = run.blowup_time();
            Ok(json!({
                "inputs": { "params": params, "C0": args.c0, "threshold": args.threshold, "dt0": args.dt0 },
                "blowup_time": t,
                "bound": bound,
                "satisfied": t < bound,
                "growth_floor": finite_or_null(run.growth_floor),
            }))
        }
        OdeMode::F0 => {
            let source: Vec<f64> = match (&args.source_file, args.source_const) {
                (Some(path), _) => read_samples(path)?,
                (None, Some(s)) => vec![s; args.steps],
                (None, None) => bail!("f0 mode needs --source-const or --source-file"),
            };
            let trace = integrate_f0_system(&source, args.dt, args.mu, args.f_init, args.fp_init)?;
            let positive = trace.f0p.iter().all(|v| *v > 0.0);
            Ok(json!({
                "inputs": { "mu": args.mu, "dt": args.dt, "samples": source.len(), "F0_init": args.f_init, "F0p_init": args.fp_init },
                "blowup_time": Value::Null,
                "bound": Value::Null,
                "satisfied": positive,
                "trace": trace,
            }))
        }
        OdeMode::Separable => {
            let p = args.p.context("--p is required")?;
            let t = separable_blowup_time(args.c, args.k, p, args.f_t1, args.t1)?;
            Ok(json!({
                "inputs": { "c": args.c, "k": args.k, "p": p, "F_T1": args.f_t1, "T1": args.t1 },
                "blowup_time": t,
                "bound": args.bound,
                "satisfied": args.bound.is_none_or(|b| t <= b),
            }))
        }
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .with_context(|| format!("{}: sample {} is not a number: {l:?}", path.display(), i + 1))
        })
        .collect()
}
