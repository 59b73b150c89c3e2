//! Command-line front end.
//!
//! Flags override values from an optional JSON config file (`--config`).
//! Exit codes: 0 success, 2 usage, 3 config, 4 domain error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::families::{builtin_families, make_family, FamilySpec};
use crate::optimizer::{self, maximize, narrow_interval, sweep, DEFAULT_ROOT_TOL};
use crate::report::{self, FamilyRow};
use crate::simulation::{analytic_group_prob, simulate_group, DEFAULT_TRIALS};
use crate::verifier::{appendix_b_checks, default_p_grid, verify_conditions, ScanConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

/// Optional environment override for the worker thread count.
pub const THREADS_ENV: &str = "GROUPSIZE_THREADS";

pub const DEFAULT_APPENDIX_POINTS: usize = 501;
pub const DEFAULT_P_STEP: f64 = 0.001;
pub const DEFAULT_X_STEP: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Families,
    Verify,
    Optimize,
    Sweep,
    Narrow,
    Simulate,
    CheckAppendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Root-finder tolerance for the maximizer.
    pub root_tol: Option<f64>,
    /// Verifier grid step on the linear part of the scan.
    pub scan_step: Option<f64>,
    /// Verifier tolerance for condition checks and root refinement.
    pub scan_tol: Option<f64>,
}

/// Fully merged invocation. The JSON config file uses these field names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub family: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Swept parameter name.
    pub param: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub step: Option<f64>,
    pub p_lo: Option<f64>,
    pub p_hi: Option<f64>,
    pub p_step: Option<f64>,
    pub x_lo: Option<f64>,
    pub x_hi: Option<f64>,
    pub x_step: Option<f64>,
    pub k: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Parser)]
#[command(
    name = "groupsize",
    version,
    about = "Certified optimal group size for group lending"
)]
struct Cli {
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Args, Default)]
struct FamilyArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct ScanArgs {
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// List the built-in families.
    Families,
    /// Check the bracketing conditions and report the certificate.
    Verify {
        #[command(flatten)]
        fam: FamilyArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Locate the optimal group size.
    Optimize {
        #[command(flatten)]
        fam: FamilyArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        root_tol: Option<f64>,
    },
    /// Optimize over a parameter grid.
    Sweep {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Shrink the interval containing the maximizer for every p on a grid.
    Narrow {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        p_lo: Option<f64>,
        #[arg(long)]
        p_hi: Option<f64>,
        #[arg(long)]
        p_step: Option<f64>,
        #[arg(long)]
        x_lo: Option<f64>,
        #[arg(long)]
        x_hi: Option<f64>,
        #[arg(long)]
        x_step: Option<f64>,
    },
    /// Monte-Carlo estimate of the group no-default probability.
    Simulate {
        #[command(flatten)]
        fam: FamilyArgs,
        /// Group size; defaults to the optimizer's k*.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the analytic checks for the yunus family.
    CheckAppendix {
        #[arg(long)]
        points: Option<usize>,
    },
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn apply_family(cfg: &mut RunConfig, fam: FamilyArgs) {
    set(&mut cfg.family, fam.family);
    if let Some(p) = fam.p {
        cfg.params.insert("p".into(), p);
    }
    if let Some(r) = fam.r {
        cfg.params.insert("r".into(), r);
    }
}

fn apply_scan(cfg: &mut RunConfig, scan: ScanArgs) {
    set(&mut cfg.x_lo, scan.x_lo);
    set(&mut cfg.x_hi, scan.x_hi);
    set(&mut cfg.tolerances.scan_step, scan.step);
    set(&mut cfg.tolerances.scan_tol, scan.tol);
}

pub fn load_config_file(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// Parses arguments (program name first) into a merged [`RunConfig`].
///
/// Help and version requests come back as `Usage` errors whose message is the
/// rendered text; [`main_with_args`] prints those and exits 0.
pub fn parse_config<I, A>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    let mut cfg = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.output, cli.output);
    set(&mut cfg.format, cli.format);
    let from_file = cli.config.is_some();
    match cli.command {
        None => {}
        Some(sub) => {
            let command = match sub {
                Sub::Families => Command::Families,
                Sub::Verify { fam, scan } => {
                    apply_family(&mut cfg, fam);
                    apply_scan(&mut cfg, scan);
                    Command::Verify
                }
                Sub::Optimize {
                    fam,
                    scan,
                    root_tol,
                } => {
                    apply_family(&mut cfg, fam);
                    apply_scan(&mut cfg, scan);
                    set(&mut cfg.tolerances.root_tol, root_tol);
                    Command::Optimize
                }
                Sub::Sweep {
                    family,
                    param,
                    lo,
                    hi,
                    step,
                } => {
                    set(&mut cfg.family, family);
                    set(&mut cfg.param, param);
                    set(&mut cfg.lo, lo);
                    set(&mut cfg.hi, hi);
                    set(&mut cfg.step, step);
                    Command::Sweep
                }
                Sub::Narrow {
                    family,
                    p_lo,
                    p_hi,
                    p_step,
                    x_lo,
                    x_hi,
                    x_step,
                } => {
                    set(&mut cfg.family, family);
                    set(&mut cfg.p_lo, p_lo);
                    set(&mut cfg.p_hi, p_hi);
                    set(&mut cfg.p_step, p_step);
                    set(&mut cfg.x_lo, x_lo);
                    set(&mut cfg.x_hi, x_hi);
                    set(&mut cfg.x_step, x_step);
                    Command::Narrow
                }
                Sub::Simulate {
                    fam,
                    k,
                    trials,
                    seed,
                } => {
                    apply_family(&mut cfg, fam);
                    set(&mut cfg.k, k);
                    set(&mut cfg.trials, trials);
                    set(&mut cfg.seed, seed);
                    Command::Simulate
                }
                Sub::CheckAppendix { points } => {
                    set(&mut cfg.points, points);
                    Command::CheckAppendix
                }
            };
            if from_file && cfg.command.is_some_and(|c| c != command) {
                return Err(CliError::Usage(format!(
                    "subcommand {command:?} conflicts with config command {:?}",
                    cfg.command.unwrap()
                )));
            }
            cfg.command = Some(command);
        }
    }
    validate(&cfg, from_file)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, from_file: bool) -> Result<(), CliError> {
    let missing = |what: &str| {
        let msg = format!("missing required field: {what}");
        if from_file {
            CliError::Config(msg)
        } else {
            CliError::Usage(msg)
        }
    };
    let command = cfg.command.ok_or_else(|| missing("command"))?;
    match command {
        Command::Verify | Command::Optimize | Command::Simulate => {
            cfg.family.as_ref().ok_or_else(|| missing("family"))?;
        }
        Command::Sweep => {
            cfg.family.as_ref().ok_or_else(|| missing("family"))?;
            cfg.param.as_ref().ok_or_else(|| missing("param"))?;
            cfg.lo.ok_or_else(|| missing("lo"))?;
            cfg.hi.ok_or_else(|| missing("hi"))?;
            cfg.step.ok_or_else(|| missing("step"))?;
        }
        Command::Narrow => {
            cfg.p_lo.ok_or_else(|| missing("p_lo"))?;
            cfg.p_hi.ok_or_else(|| missing("p_hi"))?;
        }
        Command::Families | Command::CheckAppendix => {}
    }
    let csv_ok = matches!(command, Command::Sweep | Command::Families);
    if cfg.format == Some(Format::Csv) && !csv_ok {
        return Err(CliError::Usage(format!(
            "--format csv is only available for sweep and families, not {command:?}"
        )));
    }
    Ok(())
}

fn family_of(cfg: &RunConfig) -> Result<FamilySpec<f64>, CliError> {
    let name = cfg.family.as_deref().expect("validated");
    Ok(make_family(
        name,
        cfg.params.iter().map(|(k, v)| (k.as_str(), *v)),
    )?)
}

fn scan_of(cfg: &RunConfig, fam: &FamilySpec<f64>) -> ScanConfig<f64> {
    let mut scan = ScanConfig::for_family(fam);
    if let Some(v) = cfg.x_lo {
        scan.x_lo = v;
    }
    if let Some(v) = cfg.x_hi {
        scan.x_hi = v;
    }
    if let Some(v) = cfg.tolerances.scan_step {
        scan.step = v;
    }
    if let Some(v) = cfg.tolerances.scan_tol {
        scan.tol = v;
    }
    scan
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub k: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub analytic: f64,
    /// `(estimate - analytic) / stderr`; 0 when the estimate is exact.
    pub z: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Executes a merged configuration, writing the artifact to `stdout` unless
/// an output path is set.
pub fn run<W: Write>(cfg: &RunConfig, stdout: &mut W) -> Result<(), CliError> {
    let mut buf: Vec<u8> = Vec::new();
    let rendered = render(cfg, &mut buf);
    // a failing check-appendix still emits its table
    if !buf.is_empty() {
        match &cfg.output {
            Some(path) => fs::write(path, &buf)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
            None => stdout.write_all(&buf)?,
        }
    }
    rendered
}

fn render(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), CliError> {
    let command = cfg.command.expect("validated");
    match command {
        Command::Families => {
            let rows: Vec<FamilyRow> = builtin_families().iter().map(FamilyRow::from).collect();
            match cfg.format {
                Some(Format::Json) => report::write_json(&rows, &mut *out)?,
                Some(Format::Csv) => out.extend_from_slice(report::families_csv(&rows).as_bytes()),
                None => out.extend_from_slice(report::families_table(&rows).as_bytes()),
            }
        }
        Command::Verify => {
            let fam = family_of(cfg)?;
            let cert = verify_conditions(&fam, &scan_of(cfg, &fam))?;
            report::write_json(&cert, &mut *out)?;
        }
        Command::Optimize => {
            let fam = family_of(cfg)?;
            let opt = optimize_with(cfg, &fam)?;
            report::write_json(&opt, &mut *out)?;
        }
        Command::Sweep => {
            let records = sweep(
                cfg.family.as_deref().expect("validated"),
                cfg.param.as_deref().expect("validated"),
                cfg.lo.expect("validated"),
                cfg.hi.expect("validated"),
                cfg.step.expect("validated"),
            )?;
            match cfg.format {
                Some(Format::Json) => report::write_json(&records, &mut *out)?,
                _ => report::write_sweep_csv(&records, &mut *out)?,
            }
        }
        Command::Narrow => {
            let e = std::f64::consts::E;
            let narrowed = narrow_interval(
                cfg.family.as_deref().unwrap_or("yunus"),
                cfg.p_lo.expect("validated"),
                cfg.p_hi.expect("validated"),
                cfg.p_step.unwrap_or(DEFAULT_P_STEP),
                cfg.x_lo.unwrap_or(e),
                cfg.x_hi.unwrap_or(e * e),
                cfg.x_step.unwrap_or(DEFAULT_X_STEP),
            )?;
            report::write_json(&narrowed, &mut *out)?;
        }
        Command::Simulate => {
            let fam = family_of(cfg)?;
            let k = match cfg.k {
                Some(k) => k,
                None => optimize_with(cfg, &fam)?.k_star,
            };
            let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
            let seed = cfg.seed.unwrap_or(0);
            let est = simulate_group(&fam, k, trials, seed)?;
            let analytic = analytic_group_prob(&fam, k)?;
            let z = if est.stderr > 0.0 {
                (est.estimate - analytic) / est.stderr
            } else {
                0.0
            };
            let result = SimulationOutput {
                k,
                estimate: est.estimate,
                stderr: est.stderr,
                analytic,
                z,
                trials,
                seed,
            };
            report::write_json(&result, &mut *out)?;
        }
        Command::CheckAppendix => {
            let points = cfg.points.unwrap_or(DEFAULT_APPENDIX_POINTS);
            let report = appendix_b_checks::<f64>(&default_p_grid(points))?;
            match cfg.format {
                Some(Format::Json) => report::write_json(&report, &mut *out)?,
                _ => out.extend_from_slice(report::appendix_table(&report).as_bytes()),
            }
            if !report.all_passed {
                let failed: Vec<_> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                return Err(Error::ChecksFailed(failed.join("; ")).into());
            }
        }
    }
    Ok(())
}

fn optimize_with(
    cfg: &RunConfig,
    fam: &FamilySpec<f64>,
) -> Result<optimizer::Optimum<f64>, CliError> {
    let cert = verify_conditions(fam, &scan_of(cfg, fam))?;
    if !cert.is_certified() {
        let reason = cert
            .failures
            .first()
            .map(|f| {
                format!(
                    "condition {} fails at x = {}: {}",
                    f.condition, f.witness_x, f.message
                )
            })
            .unwrap_or_else(|| "no bracket found".into());
        return Err(Error::Uncertified {
            family: fam.name().to_string(),
            reason,
        }
        .into());
    }
    Ok(maximize(
        fam,
        &cert,
        cfg.tolerances.root_tol.unwrap_or(DEFAULT_ROOT_TOL),
    )?)
}

/// Applies [`THREADS_ENV`] to the global rayon pool if set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

/// Full entry point: parse, run, report. Returns the process exit code.
pub fn main_with_args<I, A, W, E>(argv: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cfg = match Cli::try_parse_from(&argv) {
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
        Ok(_) => match parse_config(&argv) {
            Ok(cfg) => cfg,
            Err(e) => return fail(e, stderr),
        },
    };
    match run(&cfg, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e, stderr),
    }
}

fn fail<E: Write>(e: CliError, stderr: &mut E) -> i32 {
    let msg = e.to_string();
    let line = msg.lines().next().unwrap_or("error").trim_end();
    let _ = writeln!(stderr, "groupsize: {line}");
    e.exit_code()
}
