mod input;
mod manifest;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rhoci::distributions::RngStream;
use rhoci::methods::montecarlo::DEFAULT_INNER_DRAWS;
use rhoci::methods::{exact_density, ExactDensityParams};
use rhoci::sim::{run_grid, Dist, SimConfig, SimResult};
use rhoci::{compute, suff_stats, Error, Input, McConfig, MethodId};

use manifest::{join, RunManifest};

const SEED_ENV: &str = "RHO_CI_SEED";

/// Confidence intervals for a bivariate normal correlation coefficient.
#[derive(Parser)]
#[command(name = "rho-ci", version)]
struct Cli {
    /// Worker threads for simulations (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute intervals from a data file or from (r, n).
    Ci(CiArgs),
    /// Run a coverage simulation over a (ρ, n) grid.
    Simulate(SimulateArgs),
    /// Write coverage and length curves per sample size.
    Figure(FigureArgs),
    /// Tabulate the density of the sample correlation.
    Density(DensityArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Comma-separated method names (default: all).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<MethodId>,
    /// Base seed; RHO_CI_SEED takes precedence.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Inner Monte Carlo draws for PB and the GCI methods.
    #[arg(long, default_value_t = DEFAULT_INNER_DRAWS)]
    inner_m: usize,
}

impl CommonArgs {
    fn methods(&self) -> Vec<MethodId> {
        if self.methods.is_empty() {
            MethodId::ALL.to_vec()
        } else {
            self.methods.clone()
        }
    }

    fn seed(&self) -> Result<u64, Usage> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            Err(_) => Ok(self.seed),
        }
    }
}

#[derive(Args)]
struct CiArgs {
    /// Two-column CSV of paired observations.
    #[arg(long, conflicts_with_all = ["r", "n"], required_unless_present_all = ["r", "n"])]
    data: Option<PathBuf>,
    /// Sample correlation, used with --n.
    #[arg(long, allow_hyphen_values = true, requires = "n")]
    r: Option<f64>,
    /// Sample size, used with --r.
    #[arg(long, requires = "r")]
    n: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Normal,
    T,
    Lognormal,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = DistArg::Normal)]
    dist: DistArg,
    /// Degrees of freedom for --dist t.
    #[arg(long, default_value_t = 5.0)]
    df: f64,
    /// Means as `mu1,mu2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.0])]
    mu: Vec<f64>,
    /// Standard deviations as `sigma1,sigma2`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_rho_grid())]
    rho_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 15, 20])]
    n_grid: Vec<usize>,
    #[command(flatten)]
    reps: RepArgs,
    /// Score failed replicates as misses instead of dropping them.
    #[arg(long)]
    failures_as_misses: bool,
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RepArgs {
    /// Replicates per cell.
    #[arg(long, default_value_t = rhoci::sim::DEFAULT_REPS)]
    reps: usize,
    /// Replicates for Exact and the likelihood-ratio methods.
    #[arg(long, default_value_t = rhoci::sim::DEFAULT_EXPENSIVE_REPS, conflicts_with = "full")]
    expensive_reps: usize,
    /// Run every method at --reps.
    #[arg(long)]
    full: bool,
}

impl RepArgs {
    fn expensive(&self) -> Option<usize> {
        (!self.full).then_some(self.expensive_reps)
    }
}

#[derive(Args)]
struct FigureArgs {
    /// Only the normal model is supported.
    #[arg(long, value_enum, default_value_t = FigureDist::Normal)]
    dist: FigureDist,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 15, 20])]
    n: Vec<usize>,
    #[command(flatten)]
    reps: RepArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Output prefix; files are `<prefix>_n<N>_coverage.csv` and `<prefix>_n<N>_length.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureDist {
    Normal,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 2001)]
    grid_points: usize,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Bad user input discovered after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn default_rho_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

fn parse_method(s: &str) -> Result<MethodId, String> {
    s.parse::<MethodId>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Ci(a) => cmd_ci(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Density(a) => cmd_density(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_out(path)?))
}

fn fmt_num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_num)
}

fn pair(flag: &str, v: &[f64]) -> Result<[f64; 2], Usage> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(Usage(format!("{flag} takes exactly two comma-separated values"))),
    }
}

fn check_level(level: f64) -> Result<f64, Usage> {
    if level > 0.0 && level < 1.0 {
        Ok(1.0 - level)
    } else {
        Err(Usage(format!("--level {level} outside (0, 1)")))
    }
}

fn cmd_ci(a: CiArgs) -> Result<()> {
    let start = Instant::now();
    let alpha = check_level(a.common.level)?;
    let seed = a.common.seed()?;
    let methods = a.common.methods();
    let mut manifest = RunManifest::new("ci", seed);

    let data = match &a.data {
        Some(path) => {
            manifest.set("data", path.display());
            Some(input::read_pairs(path)?)
        }
        None => None,
    };
    let stats = data.as_ref().map(suff_stats).transpose()?;
    let inp = match (&data, &stats) {
        (Some(data), Some(stats)) => Input::Raw { data, stats },
        _ => {
            let (r, n) = (a.r.unwrap_or(f64::NAN), a.n.unwrap_or(0));
            if !(r.abs() < 1.0) || n < 3 {
                return Err(Usage(format!("need -1 < r < 1 and n >= 3, got r={r}, n={n}")).into());
            }
            manifest.set("r", r);
            manifest.set("n", n);
            Input::Summary { r, n }
        }
    };
    manifest.set("level", a.common.level);
    manifest.set("methods", join(&methods));
    manifest.set("inner_m", a.common.inner_m);
    let mc = McConfig::new(a.common.inner_m, RngStream::keyed(seed, "ci"));

    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["method", "lower", "upper", "clamped_lower", "clamped_upper", "note"])?;
    for m in methods {
        let row = match compute(m, &inp, alpha, &mc) {
            Ok(ci) => [
                m.name().to_string(),
                fmt_num(ci.lower),
                fmt_num(ci.upper),
                ci.clamped_lower.to_string(),
                ci.clamped_upper.to_string(),
                String::new(),
            ],
            Err(e @ (Error::RequiresRawData(_) | Error::NotApplicable { .. })) => {
                let na = || "NA".to_string();
                [m.name().to_string(), na(), na(), na(), na(), format!("skipped: {e}")]
            }
            Err(e) => return Err(e).with_context(|| format!("method {m}")),
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    if let Some(out) = &a.out {
        manifest.write_beside(out, start.elapsed())?;
    }
    Ok(())
}

fn sim_config(
    dist: Dist,
    mu: [f64; 2],
    sigma: [f64; 2],
    rho_grid: Vec<f64>,
    n_grid: Vec<usize>,
    reps: &RepArgs,
    common: &CommonArgs,
) -> Result<SimConfig> {
    let level = common.level;
    let cfg = SimConfig {
        dist,
        mu,
        sigma,
        rho_grid,
        n_grid,
        reps: reps.reps,
        expensive_reps: reps.expensive(),
        level,
        methods: common.methods(),
        inner_m: common.inner_m,
        seed: common.seed()?,
        failures_as_misses: false,
    };
    cfg.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(cfg)
}

fn config_manifest(command: &str, cfg: &SimConfig) -> RunManifest {
    let mut m = RunManifest::new(command, cfg.seed);
    m.set("dist", cfg.dist);
    m.set("mu", join(&cfg.mu));
    m.set("sigma", join(&cfg.sigma));
    m.set("rho_grid", join(&cfg.rho_grid));
    m.set("n_grid", join(&cfg.n_grid));
    m.set("reps", cfg.reps);
    m.set("expensive_reps", fmt_opt(cfg.expensive_reps.map(|r| r as f64)));
    m.set("level", cfg.level);
    m.set("methods", join(&cfg.methods));
    m.set("inner_m", cfg.inner_m);
    m.set("failures_as_misses", cfg.failures_as_misses);
    m.set("threads", rayon::current_num_threads());
    m
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let dist = match a.dist {
        DistArg::Normal => Dist::Normal,
        DistArg::T => Dist::T { df: a.df },
        DistArg::Lognormal => Dist::LogNormal,
    };
    let mut cfg = sim_config(
        dist,
        pair("--mu", &a.mu)?,
        pair("--sigma", &a.sigma)?,
        a.rho_grid,
        a.n_grid,
        &a.reps,
        &a.common,
    )?;
    cfg.failures_as_misses = a.failures_as_misses;
    let results = run_grid(&cfg)?;

    let mut w = csv_writer(Some(&a.out))?;
    w.write_record([
        "dist", "n", "rho", "target", "method", "coverage", "mean_length", "failures", "reps",
    ])?;
    for r in &results {
        w.write_record([
            r.dist.to_string(),
            r.n.to_string(),
            fmt_num(r.rho),
            fmt_num(r.target),
            r.method.name().to_string(),
            fmt_opt(r.coverage),
            fmt_opt(r.mean_length),
            r.failures.to_string(),
            r.reps.to_string(),
        ])?;
    }
    w.flush()?;
    config_manifest("simulate", &cfg).write_beside(&a.out, start.elapsed())
}

fn figure_path(prefix: &Path, n: usize, kind: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!("_n{n}_{kind}.csv"));
    prefix.with_file_name(name)
}

fn write_curve(path: &Path, column: &str, rows: &[&SimResult], value: fn(&SimResult) -> Option<f64>) -> Result<()> {
    let mut w = csv_writer(Some(path))?;
    w.write_record(["rho", "method", column])?;
    for r in rows {
        w.write_record([fmt_num(r.rho), r.method.name().to_string(), fmt_opt(value(r))])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_figure(a: FigureArgs) -> Result<()> {
    let start = Instant::now();
    let FigureDist::Normal = a.dist;
    let cfg = sim_config(
        Dist::Normal,
        [0.0, 0.0],
        [1.0, 1.0],
        default_rho_grid(),
        a.n.clone(),
        &a.reps,
        &a.common,
    )?;
    let results = run_grid(&cfg)?;
    let elapsed = start.elapsed();
    for &n in &a.n {
        let rows: Vec<&SimResult> = results.iter().filter(|r| r.n == n).collect();
        for (kind, column, value) in [
            ("coverage", "coverage", (|r: &SimResult| r.coverage) as fn(&SimResult) -> Option<f64>),
            ("length", "mean_length", |r: &SimResult| r.mean_length),
        ] {
            let path = figure_path(&a.out, n, kind);
            write_curve(&path, column, &rows, value)?;
            let mut m = config_manifest("figure", &cfg);
            m.set("figure_n", n);
            m.write_beside(&path, elapsed)?;
        }
    }
    Ok(())
}

fn density_grid(points: usize) -> impl Iterator<Item = f64> {
    let k = (points - 1) as f64;
    (0..points).map(move |i| (2.0 * i as f64 - k) / k)
}

fn cmd_density(a: DensityArgs) -> Result<()> {
    let start = Instant::now();
    if a.grid_points < 2 {
        return Err(Usage("--grid-points must be at least 2".into()).into());
    }
    let params = ExactDensityParams::new(a.n, a.rho).map_err(|e| Usage(e.to_string()))?;
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["r", "density"])?;
    for r in density_grid(a.grid_points) {
        let f = if r.abs() < 1.0 {
            exact_density(r, &params)?
        } else if a.n > 4 {
            0.0
        } else {
            exact_density(r * (1.0 - 1e-9), &params)?
        };
        w.write_record([fmt_num(r), fmt_num(f)])?;
    }
    w.flush()?;
    if let Some(out) = &a.out {
        let mut m = RunManifest::new("density", 0);
        m.set("n", a.n);
        m.set("rho", a.rho);
        m.set("grid_points", a.grid_points);
        m.write_beside(out, start.elapsed())?;
    }
    Ok(())
}
