//! The `gmink` command-line driver.
//!
//! Exit codes: 0 on success, 1 when a solve or a property suite fails,
//! 2 on invalid input. Diagnostics go to stderr at the level selected by
//! `GMINK_LOG` (`quiet`, `info` or `trace`; warnings only when unset).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::geometry::{build_grid, DirectionGrid, Resolution};
use crate::io::{read_body, write_body, write_json, write_report, write_trace_csv, DensityFile, DensitySpec, SCHEMA_VERSION};
use crate::isotropic::{isotropic_report, isotropic_threshold};
use crate::measures::{
    gaussian_volume, gaussian_volume_mc, mass_threshold, surface_measure_density, McEstimate,
};
use crate::solver::{homotopy_solve, solve_both, Branch, SolveConfig, SolveFailure, SolveReport};
use crate::verification::{check_isoperimetric_on, check_weak_convergence, probe_isotropic_constancy_on, random_even_body, DEFAULT_AMPLITUDE};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "gmink", version, about = "L_p-Gaussian Minkowski problem toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Directory for machine-readable artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Problem {
    /// Ambient dimension (2 or 3)
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constant solutions of r^{n-p} e^{-r^2/2} = C
    Isotropic {
        #[command(flatten)]
        problem: Problem,
        #[arg(long = "C", alias = "c")]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian volume of a body file, with a Monte Carlo cross-check
    Volume {
        body: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// L_p-Gaussian surface area density and total mass of a body file
    Measure {
        body: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the equation for a density on one or both volume branches
    Solve {
        #[command(flatten)]
        problem: Problem,
        /// `N` on S^1 or `NLATxNLON` on S^2 [default: 256 or 32x64]
        #[arg(long)]
        grid: Option<String>,
        /// `constant:C`, `cosine_even:c=..,a1=..`, `harmonic_even:c=..,a2=..` or a JSON file
        #[arg(long)]
        density: String,
        #[arg(long, value_enum, default_value_t = BranchArg::Both)]
        branch: BranchArg,
        #[command(flatten)]
        common: Common,
    },
    /// Run a property suite
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Isotropic level for the constancy suite
        #[arg(long = "C", alias = "c", default_value_t = 0.5)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Isotropic threshold and the L^1 mass threshold of the small-volume theorem
    Threshold {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Small,
    Large,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Isoperimetric,
    WeakConvergence,
    Constancy,
}

enum Failure {
    Input(Error),
    Solve(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solve(f) => Failure::Solve(f.to_string()),
            e => Failure::Input(e),
        }
    }
}

type Outcome = Result<(), Failure>;

fn init_logging() {
    let level = match std::env::var("GMINK_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Runs the CLI on `argv` (including the program name), printing the summary
/// to stdout and errors to stderr. Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    run(argv, &mut stdout.lock())
}

/// As [`cli_main`] with the summary written to `out`.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Solve(msg)) => {
            eprintln!("failure: {msg}");
            1
        }
    }
}

fn parse_grid(n: usize, grid: Option<&str>) -> Result<Arc<DirectionGrid>, Error> {
    let res = match grid {
        None if n == 2 => Resolution::Circle { n: 256 },
        None => Resolution::Sphere { n_lat: 32, n_lon: 64 },
        Some(s) => {
            let parts = s
                .split('x')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidGrid(format!("cannot parse grid '{s}'")))?;
            Resolution::from_slice(n, &parts)?
        }
    };
    build_grid(n, res)
}

fn out_dir(common: &Common) -> Result<Option<&Path>, Error> {
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
    }
    Ok(common.out.as_deref())
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) {
    let _ = writeln!(out, "{text}");
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { say($out, format_args!($($arg)*)) };
}

#[derive(Serialize)]
struct ThresholdRecord {
    schema_version: u64,
    n: usize,
    p: f64,
    isotropic_threshold: Option<f64>,
    mass_threshold: f64,
}

#[derive(Serialize)]
struct VolumeRecord {
    schema_version: u64,
    gamma_n: f64,
    monte_carlo: McEstimate,
    seed: u64,
}

fn execute(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Isotropic { problem, c, common } => {
            let rep = isotropic_report(problem.n, problem.p, c)?;
            say!(out, "n = {}, p = {}, C = {}", rep.n, rep.p, rep.c);
            say!(out, "threshold e^{{-(n-p)/2}}(n-p)^{{(n-p)/2}} = {:.12}", rep.threshold);
            say!(out, "constant solutions: {}", rep.root_count);
            for r in &rep.roots {
                say!(out, "  r = {r:.12}");
            }
            if let Some(dir) = out_dir(&common)? {
                write_json(&dir.join("isotropic.json"), &rep)?;
            }
        }
        Command::Threshold { problem, common } => {
            let (n, p) = (problem.n, problem.p);
            if !(n == 2 || n == 3) || !(p >= 1.0) {
                return Err(Error::Domain(format!("need n in {{2, 3}} and p >= 1, got n = {n}, p = {p}")).into());
            }
            let iso = isotropic_threshold(n, p).ok();
            let mass = mass_threshold(n, p);
            match iso {
                Some(t) => say!(out, "isotropic threshold: {t:.6}"),
                None => say!(out, "isotropic threshold: undefined for p >= n"),
            }
            say!(out, "L1 mass threshold: {mass:.6}");
            if let Some(dir) = out_dir(&common)? {
                let rec = ThresholdRecord {
                    schema_version: SCHEMA_VERSION,
                    n,
                    p,
                    isotropic_threshold: iso,
                    mass_threshold: mass,
                };
                write_json(&dir.join("threshold.json"), &rec)?;
            }
        }
        Command::Volume { body, samples, common } => {
            let h = read_body(&body)?;
            let g = gaussian_volume(&h)?;
            let mc = gaussian_volume_mc(&h, samples, common.seed)?;
            say!(out, "gamma_{} (quadrature) = {g:.10}", h.dim());
            say!(
                out,
                "gamma_{} (Monte Carlo, {} samples) = {:.6} +/- {:.2e} ({:.2} standard errors)",
                h.dim(),
                mc.samples,
                mc.value,
                mc.std_error,
                (mc.value - g).abs() / mc.std_error.max(f64::MIN_POSITIVE)
            );
            if let Some(dir) = out_dir(&common)? {
                let rec = VolumeRecord {
                    schema_version: SCHEMA_VERSION,
                    gamma_n: g,
                    monte_carlo: mc,
                    seed: common.seed,
                };
                write_json(&dir.join("volume.json"), &rec)?;
            }
        }
        Command::Measure { body, common } => {
            let h = read_body(&body)?;
            let d = surface_measure_density(&h)?;
            say!(out, "total L_p-Gaussian surface measure (p = {}) = {:.10}", h.p(), d.l1_norm());
            if let Some(dir) = out_dir(&common)? {
                write_json(&dir.join("measure.json"), &DensityFile::new(&d, h.p()))?;
            }
        }
        Command::Solve {
            problem,
            grid,
            density,
            branch,
            common,
        } => {
            let grid = parse_grid(problem.n, grid.as_deref())?;
            let f = DensitySpec::parse(&density)?.to_density(&grid)?;
            let (p, cfg) = (problem.p, SolveConfig::default());
            say!(out, "grid {}, |f|_L1 = {:.6}, mass threshold {:.6}", grid.resolution(), f.l1_norm(), mass_threshold(problem.n, p));
            let results: Vec<(Branch, Result<SolveReport, SolveFailure>)> = match branch {
                BranchArg::Small => vec![(Branch::Small, homotopy_solve(&f, p, Branch::Small, &cfg))],
                BranchArg::Large => vec![(Branch::Large, homotopy_solve(&f, p, Branch::Large, &cfg))],
                BranchArg::Both => {
                    let both = solve_both(&f, p, &cfg);
                    if let Some(d) = both.hausdorff {
                        say!(out, "Hausdorff distance between branches: {d:.6}");
                    }
                    if both.hausdorff.is_some() && !both.distinct {
                        say!(out, "branches collapsed onto a single solution");
                        vec![(Branch::Small, both.small)]
                    } else {
                        vec![(Branch::Small, both.small), (Branch::Large, both.large)]
                    }
                }
            };
            let dir = out_dir(&common)?;
            let mut failed = Vec::new();
            for (b, r) in results {
                match r {
                    Ok(rep) => {
                        say!(
                            out,
                            "{b}: gamma_{} = {:.6}, sup|F| = {:.2e}, h in [{:.6}, {:.6}], {} continuation steps, {} Newton steps",
                            problem.n,
                            rep.gamma_n,
                            rep.residual_sup,
                            rep.solution.min(),
                            rep.solution.max(),
                            rep.homotopy_trace.len().saturating_sub(1),
                            rep.homotopy_trace.iter().map(|t| t.newton_steps).sum::<usize>()
                        );
                        if let Some(dir) = dir {
                            write_body(&dir.join(format!("body_{b}.json")), &rep.solution)?;
                            write_report(&dir.join(format!("report_{b}.json")), &rep)?;
                            write_trace_csv(&dir.join(format!("trace_{b}.csv")), &rep.homotopy_trace)?;
                        }
                    }
                    Err(e) => {
                        say!(out, "{b}: failed: {e}");
                        failed.push(format!("{b} branch: {e}"));
                    }
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Solve(failed.join("; ")));
            }
        }
        Command::Verify {
            suite,
            problem,
            grid,
            trials,
            c,
            common,
        } => {
            let (n, p, seed) = (problem.n, problem.p, common.seed);
            let rec = match suite {
                Suite::Isoperimetric => check_isoperimetric_on(&parse_grid(n, grid.as_deref())?, trials, p, seed)?,
                Suite::WeakConvergence => {
                    let grid = parse_grid(n, grid.as_deref())?;
                    let target = random_even_body(&grid, p, seed, DEFAULT_AMPLITUDE)?;
                    check_weak_convergence(&target, 24, seed)?
                }
                Suite::Constancy => {
                    let grid = match grid {
                        Some(g) => parse_grid(n, Some(&g))?,
                        None if n == 2 => build_grid(2, Resolution::Circle { n: 128 })?,
                        None => build_grid(3, Resolution::Sphere { n_lat: 16, n_lon: 32 })?,
                    };
                    let seeds: Vec<u64> = (0..trials as u64).map(|i| seed.wrapping_add(i)).collect();
                    probe_isotropic_constancy_on(&grid, p, c, &seeds)?
                }
            };
            say!(
                out,
                "{}: {} trials, {} failures, {} inconclusive, worst margin {}",
                rec.name,
                rec.trials,
                rec.failures,
                rec.inconclusive,
                rec.worst_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}"))
            );
            say!(out, "{}", if rec.passed() { "PASS" } else { "FAIL" });
            if let Some(dir) = out_dir(&common)? {
                write_json(&dir.join(format!("{}.json", rec.name)), &rec)?;
            }
            if !rec.passed() {
                return Err(Failure::Solve(format!("{} failed {} checks", rec.name, rec.failures)));
            }
        }
    }
    Ok(())
}
