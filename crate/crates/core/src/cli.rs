//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 verification failure,
//! 1 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{self, Axis, CalibrationTarget, SearchBox};
use crate::error::{CalibrationError, ModelError};
use crate::model::{Params, SimplexState};
use crate::output::write_csv;
use crate::qso::{build_tensor, verify_tensor, AXIOM_TOL};
use crate::spectral::{classify, critical_alpha, EigenspaceDims, Regime};
use crate::trajectory::{
    completion_day, find_limit, peak, simulate, ConvergenceOptions, LimitReport, Trajectory,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Population used when none is configured (Uzbekistan, 2020).
pub const DEFAULT_POPULATION: f64 = 34_000_000.0;
pub const DEFAULT_STEPS: usize = 300;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "seir-qso",
    version,
    about = "Discrete-time SEIR map on the 3-simplex"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario; write the trajectory CSV and a summary document.
    Simulate(SimulateArgs),
    /// Spectral report at fixed points (α, 0, 0, 1 − α).
    Analyze(AnalyzeArgs),
    /// Dump and verify the quadratic stochastic operator coefficients.
    Qso(QsoArgs),
    /// Grid-search rates matching a target peak (and completion) day.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Toml,
}

#[derive(Debug, Args)]
pub struct ParamFlags {
    /// Flat TOML scenario file; flags take precedence over its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StateFlags {
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub i0: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Population size N.
    #[arg(long)]
    pub population: Option<f64>,
    /// Interpret s0, e0, i0, r0 as head counts summing to the population.
    #[arg(long)]
    pub counts: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub state: StateFlags,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Trajectory CSV path; stdout when absent (the summary then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary document format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Infectious fraction below which the epidemic counts as finished (default 1/N).
    #[arg(long)]
    pub completion_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Fixed-point susceptible fraction; repeatable.
    #[arg(long)]
    pub alpha: Vec<f64>,
    /// Sweep `lo:hi:step`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct QsoArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Tensor dump path; stdout when absent (the report then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Flat TOML file; rate keys are ignored, ranges and targets are read.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub state: StateFlags,
    #[arg(long)]
    pub target_peak: Option<usize>,
    #[arg(long)]
    pub target_completion: Option<usize>,
    #[arg(long)]
    pub completion_threshold: Option<f64>,
    /// `lo:hi:points`, or a single value to hold the rate fixed.
    #[arg(long)]
    pub a_range: Option<String>,
    #[arg(long)]
    pub b_range: Option<String>,
    #[arg(long)]
    pub beta_range: Option<String>,
    #[arg(long)]
    pub q_range: Option<String>,
    /// Upper bound on grid points (at most the built-in cap).
    #[arg(long)]
    pub max_points: Option<u128>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Keys accepted in the flat TOML configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub s0: Option<f64>,
    pub e0: Option<f64>,
    pub i0: Option<f64>,
    pub r0: Option<f64>,
    pub population: Option<f64>,
    pub counts: Option<bool>,
    pub steps: Option<usize>,
    pub completion_threshold: Option<f64>,
    pub format: Option<Format>,
    pub alpha: Option<Vec<f64>>,
    pub sweep: Option<String>,
    pub target_peak: Option<usize>,
    pub target_completion: Option<usize>,
    pub a_range: Option<String>,
    pub b_range: Option<String>,
    pub beta_range: Option<String>,
    pub q_range: Option<String>,
    pub max_points: Option<u128>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

/// Resolved scenario: flags over file over the Uzbekistan defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub params: Params,
    pub initial_state: SimplexState,
    pub population: f64,
    pub steps: usize,
    pub completion_threshold: Option<f64>,
}

impl ScenarioConfig {
    pub fn threshold(&self) -> f64 {
        self.completion_threshold.unwrap_or(1.0 / self.population)
    }
}

fn resolve_params(flags: &ParamFlags, file: &FileConfig) -> Params {
    let d = Params::uzbekistan();
    Params {
        beta: flags.beta.or(file.beta).unwrap_or(d.beta),
        q: flags.q.or(file.q).unwrap_or(d.q),
        a: flags.a.or(file.a).unwrap_or(d.a),
        b: flags.b.or(file.b).unwrap_or(d.b),
    }
}

fn resolve_state(flags: &StateFlags, file: &FileConfig) -> Result<(SimplexState, f64), CliError> {
    let population = flags
        .population
        .or(file.population)
        .unwrap_or(DEFAULT_POPULATION);
    if !(population.is_finite() && population > 0.0) {
        return Err(CliError::Input(format!(
            "population must be positive, got {population}"
        )));
    }
    let coords = [
        flags.s0.or(file.s0),
        flags.e0.or(file.e0),
        flags.i0.or(file.i0),
        flags.r0.or(file.r0),
    ];
    let counts = flags.counts || file.counts.unwrap_or(false);
    if coords.iter().all(Option::is_none) {
        if counts {
            return Err(CliError::Input("counts mode needs s0, e0, i0, r0".into()));
        }
        return Ok((SimplexState::new(0.99999, 0.0, 0.00001, 0.0)?, population));
    }
    let values = coords.map(|c| c.unwrap_or(0.0));
    let state = if counts {
        SimplexState::from_counts(values, population)?
    } else {
        let [s, e, i, r] = values;
        SimplexState::new(s, e, i, r)?
    };
    Ok((state, population))
}

fn emit<T: Serialize>(doc: &T, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => serde_json::to_string_pretty(doc)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Io(io::Error::other(e))),
        Format::Toml => toml::to_string(doc).map_err(|e| CliError::Io(io::Error::other(e))),
    }
}

fn write_to(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Summary of a simulated scenario.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub params: Params,
    pub initial_state: SimplexState,
    pub population: f64,
    pub steps: usize,
    pub peak_day: usize,
    pub peak_value: f64,
    /// Peak infectious head count, `peak_value · N`.
    pub peak_persons: f64,
    pub completion_threshold: f64,
    pub completion_day: Option<usize>,
    /// First simulated day with `A > 0`.
    pub exposed_outflow_positive_day: Option<usize>,
    /// First simulated day with `B > 0`.
    pub infectious_outflow_positive_day: Option<usize>,
    /// First simulated day in the post-peak set `M` (`A > 0` and `B > 0`).
    pub entry_into_m_day: Option<usize>,
    pub critical_alpha: Option<f64>,
    pub limit: LimitReport,
}

pub fn summarize(cfg: &ScenarioConfig, t: &Trajectory) -> Result<SimulationSummary, ModelError> {
    let (peak_day, peak_value) = peak(t).unwrap_or((0, 0.0));
    let threshold = cfg.threshold();
    let first = |f: &dyn Fn(&crate::trajectory::StepDiagnostics) -> bool| {
        t.diagnostics().iter().position(f)
    };
    Ok(SimulationSummary {
        params: cfg.params,
        initial_state: cfg.initial_state,
        population: cfg.population,
        steps: cfg.steps,
        peak_day,
        peak_value,
        peak_persons: peak_value * cfg.population,
        completion_threshold: threshold,
        completion_day: completion_day(t, threshold),
        exposed_outflow_positive_day: first(&|d| d.outflow_exposed > 0.0),
        infectious_outflow_positive_day: first(&|d| d.outflow_infectious > 0.0),
        entry_into_m_day: first(&|d| d.in_m),
        critical_alpha: critical_alpha(&cfg.params).ok(),
        limit: find_limit(
            &cfg.initial_state,
            &cfg.params,
            ConvergenceOptions::default(),
        )?,
    })
}

fn scenario(args: &SimulateArgs, file: &FileConfig) -> Result<ScenarioConfig, CliError> {
    let params = resolve_params(&args.params, file);
    params.ensure_admissible()?;
    let (initial_state, population) = resolve_state(&args.state, file)?;
    let completion_threshold = args.completion_threshold.or(file.completion_threshold);
    if let Some(t) = completion_threshold {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Input(format!(
                "completion threshold must be positive, got {t}"
            )));
        }
    }
    Ok(ScenarioConfig {
        params,
        initial_state,
        population,
        steps: args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
        completion_threshold,
    })
}

pub fn cmd_simulate(
    args: &SimulateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let file = load_config(&args.params.config)?;
    let cfg = scenario(args, &file)?;
    let format = args.format.or(file.format).unwrap_or_default();
    let t = simulate(&cfg.initial_state, &cfg.params, cfg.steps)?;
    let summary = emit(&summarize(&cfg, &t)?, format)?;
    match &args.out {
        Some(path) => {
            let f = fs::File::create(path)
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            write_csv(&t, io::BufWriter::new(f))?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => {
            write_csv(&t, &mut *stdout)?;
            stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

/// Spectral report row; `critical_alpha` is hoisted to the document in sweeps.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisRow {
    pub alpha: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    #[serde(rename = "D")]
    pub discriminant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    pub dims: EigenspaceDims,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisDocument {
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_alpha: Option<f64>,
    pub reports: Vec<AnalysisRow>,
}

/// Parses `lo:hi:step` into the inclusive list of α values.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("sweep must be lo:hi:step, got `{spec}`"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(CliError::Input("sweep has too many points".into()));
    }
    Ok((0..=count)
        .map(|k| (lo + k as f64 * step).min(hi))
        .collect())
}

pub fn analysis_document(
    params: &Params,
    alphas: &[f64],
    sweep: bool,
) -> Result<AnalysisDocument, CliError> {
    params.ensure_admissible()?;
    let critical = critical_alpha(params).ok();
    let reports = alphas
        .iter()
        .map(|&alpha| {
            let r = classify(alpha, params)?;
            Ok(AnalysisRow {
                alpha: r.alpha,
                mu1: r.mu1,
                mu2: r.mu2,
                mu3: r.mu3,
                discriminant: r.discriminant,
                critical_alpha: if sweep { None } else { r.critical_alpha },
                regime: r.regime,
                dims: r.dims,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(AnalysisDocument {
        params: *params,
        critical_alpha: if sweep { critical } else { None },
        reports,
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = load_config(&args.params.config)?;
    let params = resolve_params(&args.params, &file);
    params.ensure_admissible()?;
    let format = args.format.or(file.format).unwrap_or_default();
    let sweep = args.sweep.clone().or(file.sweep.clone());
    let mut alphas = if args.alpha.is_empty() {
        file.alpha.clone().unwrap_or_default()
    } else {
        args.alpha.clone()
    };
    let is_sweep = sweep.is_some();
    if let Some(spec) = sweep {
        alphas.extend(parse_sweep(&spec)?);
    }
    if alphas.is_empty() {
        return Err(CliError::Input(
            "give at least one --alpha or a --sweep".into(),
        ));
    }
    let doc = emit(&analysis_document(&params, &alphas, is_sweep)?, format)?;
    match &args.out {
        Some(path) => write_to(path, &doc),
        None => Ok(stdout.write_all(doc.as_bytes())?),
    }
}

pub fn cmd_qso(
    args: &QsoArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let file = load_config(&args.params.config)?;
    let params = resolve_params(&args.params, &file);
    let format = args.format.or(file.format).unwrap_or_default();
    let tensor = build_tensor(&params)?;
    let report = verify_tensor(&tensor, AXIOM_TOL);
    let doc = emit(&report, format)?;
    match &args.out {
        Some(path) => {
            write_to(path, &tensor.dump())?;
            stdout.write_all(doc.as_bytes())?;
        }
        None => {
            stdout.write_all(tensor.dump().as_bytes())?;
            stderr.write_all(doc.as_bytes())?;
        }
    }
    if report.passed() {
        return Ok(());
    }
    let mut failed = Vec::new();
    for (name, check) in [
        ("symmetry", &report.symmetry),
        ("non-negativity", &report.non_negativity),
        ("stochasticity", &report.stochasticity),
    ] {
        if !check.passed {
            let (i, j, k) = check.at;
            failed.push(format!(
                "{name} failure at ({i},{j},{k}), magnitude {:e}",
                check.worst
            ));
        }
    }
    Err(CliError::Verification(failed.join("; ")))
}

/// Parses `lo:hi:points` or a single fixed value.
pub fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let bad = || {
        CliError::Input(format!(
            "range must be lo:hi:points or a value, got `{spec}`"
        ))
    };
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    match parts[..] {
        [v] => Ok(Axis::fixed(v.parse().map_err(|_| bad())?)),
        [lo, hi, n] => Ok(Axis::new(
            lo.parse().map_err(|_| bad())?,
            hi.parse().map_err(|_| bad())?,
            n.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

pub fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let format = args.format.or(file.format).unwrap_or_default();
    let (initial_state, population) = resolve_state(&args.state, &file)?;
    let peak_day = args
        .target_peak
        .or(file.target_peak)
        .ok_or_else(|| CliError::Input("--target-peak is required".into()))?;
    let target = CalibrationTarget {
        peak_day,
        completion_day: args.target_completion.or(file.target_completion),
        population,
        initial_state,
        completion_threshold: args.completion_threshold.or(file.completion_threshold),
    };
    let defaults = SearchBox::default();
    let axis = |flag: &Option<String>, key: &Option<String>, d: Axis| -> Result<Axis, CliError> {
        match flag.as_ref().or(key.as_ref()) {
            Some(s) => parse_axis(s),
            None => Ok(d),
        }
    };
    let search = SearchBox {
        a: axis(&args.a_range, &file.a_range, defaults.a)?,
        b: axis(&args.b_range, &file.b_range, defaults.b)?,
        beta: axis(&args.beta_range, &file.beta_range, defaults.beta)?,
        q: axis(&args.q_range, &file.q_range, defaults.q)?,
    };
    let cap = args
        .max_points
        .or(file.max_points)
        .unwrap_or(calibration::MAX_GRID_POINTS)
        .min(calibration::MAX_GRID_POINTS);
    let result = calibration::grid_search_capped(&search, &target, cap)?;
    let doc = emit(&result, format)?;
    match &args.out {
        Some(path) => write_to(path, &doc),
        None => Ok(stdout.write_all(doc.as_bytes())?),
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Qso(a) => cmd_qso(a, stdout, stderr),
        Command::Fit(a) => cmd_fit(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return EXIT_INPUT;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
