//! Command-line front end: JSON config parsing, flag overrides, and the
//! four commands (`analytic`, `simulate`, `sweep`, `layout`) emitting JSON
//! summaries and CSV tables for plotting.
//!
//! Outputs are pure functions of the config file and flags: no clock,
//! locale, or environment dependence, and seeded commands are byte-identical
//! across runs and thread counts. Floats are printed with Rust's shortest
//! round-trip formatting so goldens are stable and parse back exactly.
//!
//! Exit codes: 0 success, 2 config/validation error, 3 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::analytic;
use crate::layout::{effective_line_factor, estimate_density, evaluate_layout, Layout, LayoutError, LayoutQuery};
use crate::model::{ScenarioParams, ValidationError};
use crate::montecarlo::{self, run_trials, SweepRow, TrialConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Validation(#[from] ValidationError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<LayoutError> for CliError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "blockage-geom", version, about = "LOS/NLOS interval statistics for a trajectory near a base station")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form summary, optionally tabulated over a z or r grid.
    Analytic(CommonArgs),
    /// Monte Carlo trial campaign with empirical CDFs.
    Simulate(CommonArgs),
    /// Interval density and mean lengths over a list of BS distances.
    Sweep(CommonArgs),
    /// Deterministic evaluation of a building-layout file.
    Layout(CommonArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for CSV/JSON files (default: current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master RNG seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trial count override.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Comma-separated BS distances override, e.g. --r 50,100,200.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Keep boundary-truncated intervals in the length statistics.
    #[arg(long)]
    pub include_censored: bool,
}

/// Raw config file contents. Every CLI flag overrides its key here.
#[derive(Debug, Clone, Deserialize)]
pub struct ConfigFile {
    pub lambda: f64,
    pub r: f64,
    pub d: f64,
    pub h_bs: f64,
    pub h_user: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub h_min: f64,
    pub h_max: f64,
    #[serde(default)]
    pub n_trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub include_censored: Option<bool>,
    #[serde(default)]
    pub z_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub r_values: Option<Vec<f64>>,
    #[serde(default)]
    pub layout_path: Option<PathBuf>,
    #[serde(default)]
    pub query: Option<LayoutQuery>,
}

/// Fully resolved configuration after merging file and flags.
#[derive(Debug, Clone)]
pub struct Config {
    pub params: ScenarioParams,
    pub n_trials: u64,
    pub seed: u64,
    pub include_censored: bool,
    pub z_grid: Option<Vec<f64>>,
    pub r_values: Option<Vec<f64>>,
    pub layout_path: Option<PathBuf>,
    pub query: Option<LayoutQuery>,
    pub out_dir: PathBuf,
}

fn check_sorted(name: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{name} must be non-empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

pub fn load_config(args: &CommonArgs) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(&args.config)?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;

    let params = ScenarioParams {
        lambda: file.lambda,
        r: file.r,
        d: file.d,
        h_bs: file.h_bs,
        h_user: file.h_user,
        l_min: file.l_min,
        l_max: file.l_max,
        h_min: file.h_min,
        h_max: file.h_max,
    }
    .validate()?;

    let r_values = args.r.clone().or(file.r_values);
    if let Some(grid) = &r_values {
        check_sorted("r_values", grid)?;
    }
    if let Some(grid) = &file.z_grid {
        check_sorted("z_grid", grid)?;
    }

    Ok(Config {
        params,
        n_trials: args.trials.or(file.n_trials).unwrap_or(100),
        seed: args.seed.or(file.seed).unwrap_or(0),
        include_censored: args.include_censored || file.include_censored.unwrap_or(false),
        z_grid: file.z_grid,
        r_values,
        layout_path: file.layout_path,
        query: file.query,
        out_dir: args.out.clone().unwrap_or_else(|| PathBuf::from(".")),
    })
}

/// Default z grid: 100 points up to five mean LOS lengths.
fn default_z_grid(params: &ScenarioParams) -> Vec<f64> {
    let hi = 5.0 * analytic::mean_los_length(params);
    (1..=100).map(|i| i as f64 * hi / 100.0).collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn cmd_analytic(config: &Config) -> Result<String, CliError> {
    let summary = analytic::summarize(&config.params);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&config.out_dir, "analytic_summary.json", &json)?;

    if let Some(z_grid) = &config.z_grid {
        let mut csv = String::from("z,cdf_bound,pdf_approx,p_segment_los\n");
        for &z in z_grid {
            writeln!(
                csv,
                "{},{},{},{}",
                z,
                analytic::cdf_los_bound(&config.params, z),
                analytic::pdf_los_approx(&config.params, z),
                analytic::p_segment_los(&config.params, z)
            )
            .unwrap();
        }
        write_file(&config.out_dir, "analytic_z.csv", &csv)?;
    }
    if let Some(r_values) = &config.r_values {
        let mut csv = String::from("r,p_los,mean_Z,mean_S,density\n");
        for &r in r_values {
            let p = config.params.with_r(r);
            writeln!(
                csv,
                "{},{},{},{},{}",
                r,
                analytic::p_los_point(&p),
                analytic::mean_los_length(&p),
                analytic::mean_nlos_length(&p),
                analytic::interval_density(&p)
            )
            .unwrap();
        }
        write_file(&config.out_dir, "analytic_r.csv", &csv)?;
    }
    Ok(json)
}

pub fn cmd_simulate(config: &Config) -> Result<String, CliError> {
    let trial_config = TrialConfig {
        params: config.params,
        n_trials: config.n_trials,
        seed: config.seed,
        include_censored: config.include_censored,
    };
    let stats = run_trials(&trial_config);

    let mut intervals_csv = String::from("kind,length,censored\n");
    for len in &stats.los_lengths {
        writeln!(intervals_csv, "LOS,{len},false").unwrap();
    }
    for len in &stats.nlos_lengths {
        writeln!(intervals_csv, "NLOS,{len},false").unwrap();
    }
    write_file(&config.out_dir, "intervals.csv", &intervals_csv)?;

    let grid = config
        .z_grid
        .clone()
        .unwrap_or_else(|| default_z_grid(&config.params));
    let mut cdf_csv = String::from("z,empirical_cdf,cdf_bound\n");
    if !stats.los_lengths.is_empty() {
        for (z, f_hat) in montecarlo::empirical_cdf(&stats.los_lengths, &grid)
            .expect("non-empty samples")
        {
            writeln!(
                cdf_csv,
                "{},{},{}",
                z,
                f_hat,
                analytic::cdf_los_bound(&config.params, z)
            )
            .unwrap();
        }
    }
    write_file(&config.out_dir, "cdf.csv", &cdf_csv)?;

    let analytic_summary = analytic::summarize(&config.params);
    let summary = serde_json::json!({
        "n_trials": config.n_trials,
        "seed": config.seed,
        "total_trajectory_length": stats.total_trajectory_length,
        "point_los_frequency": stats.point_los_frequency(),
        "n_los_intervals": stats.n_los_uncensored,
        "n_nlos_intervals": stats.n_nlos_uncensored,
        "n_los_censored": stats.n_los_censored(),
        "n_nlos_censored": stats.n_nlos_censored(),
        "analytic": analytic_summary,
    });
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&config.out_dir, "summary.json", &json)?;
    Ok(json)
}

fn sweep_csv(params: &ScenarioParams, rows: &[SweepRow]) -> String {
    let mut csv = String::from(
        "r,density_los,density_nlos,meanZ_emp,meanS_emp,meanZ_theory,meanS_theory,density_theory\n",
    );
    for row in rows {
        let p = params.with_r(row.r);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.r,
            row.los_density,
            row.nlos_density,
            row.mean_z,
            row.mean_s,
            analytic::mean_los_length(&p),
            analytic::mean_nlos_length(&p),
            analytic::interval_density(&p)
        )
        .unwrap();
    }
    csv
}

pub fn cmd_sweep(config: &Config) -> Result<String, CliError> {
    let r_values = config
        .r_values
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires r_values (or --r)".into()))?;
    let rows = montecarlo::density_sweep(&config.params, r_values, config.n_trials, config.seed);
    let csv = sweep_csv(&config.params, &rows);
    write_file(&config.out_dir, "sweep.csv", &csv)?;

    let (r_peak, peak_value) = montecarlo::fit_density_peak(&rows);
    let crossing = montecarlo::find_length_crossing(&rows);
    let summary = serde_json::json!({
        "r_peak_fit": r_peak,
        "peak_density_fit": peak_value,
        "crossing": crossing.map(|(r, len)| serde_json::json!({"r": r, "length": len})),
        "r_max_density_theory": analytic::critical_radii(&config.params).0,
        "r_equal_theory": analytic::critical_radii(&config.params).1,
    });
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&config.out_dir, "sweep_summary.json", &json)?;
    Ok(json)
}

pub fn cmd_layout(config: &Config) -> Result<String, CliError> {
    let path = config
        .layout_path
        .as_ref()
        .ok_or_else(|| CliError::Config("layout command requires layout_path".into()))?;
    let query = config
        .query
        .as_ref()
        .ok_or_else(|| CliError::Config("layout command requires a query block".into()))?;
    let layout = Layout::from_file(path)?;
    let eval = evaluate_layout(&layout, query)?;

    let mut lengths_csv = String::from("length\n");
    for len in &eval.los_lengths {
        writeln!(lengths_csv, "{len}").unwrap();
    }
    write_file(&config.out_dir, "layout_intervals.csv", &lengths_csv)?;

    // analytic overlay: the line density seen by the model is the building
    // density scaled by the distance-dependent lines-per-building factor
    let lambda_lines = effective_line_factor(query.r) * estimate_density(&layout) * query.thinning;
    let overlay = ScenarioParams {
        lambda: lambda_lines,
        r: query.r,
        d: query.u_hi - query.u_lo,
        h_bs: query.bs_h,
        h_user: query.user_h,
        ..config.params
    }
    .validate()?;

    let grid = config
        .z_grid
        .clone()
        .unwrap_or_else(|| default_z_grid(&overlay));
    let mut cdf_csv = String::from("z,empirical_cdf,analytic_cdf\n");
    if !eval.los_lengths.is_empty() {
        for (z, f_hat) in
            montecarlo::empirical_cdf(&eval.los_lengths, &grid).expect("non-empty samples")
        {
            writeln!(cdf_csv, "{},{},{}", z, f_hat, analytic::cdf_los_bound(&overlay, z)).unwrap();
        }
    }
    write_file(&config.out_dir, "layout_cdf.csv", &cdf_csv)?;

    let summary = serde_json::json!({
        "layout": layout.name,
        "building_density": estimate_density(&layout),
        "lambda_lines": lambda_lines,
        "line_factor": effective_line_factor(query.r),
        "lines_used": eval.lines_used,
        "n_los_intervals": eval.los_lengths.len(),
        "point_los_frequency": eval.point_los_frequency,
    });
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&config.out_dir, "layout_summary.json", &json)?;
    Ok(json)
}

/// Runs one parsed command; returns the stdout payload.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Analytic(args) => cmd_analytic(&load_config(args)?),
        Command::Simulate(args) => cmd_simulate(&load_config(args)?),
        Command::Sweep(args) => cmd_sweep(&load_config(args)?),
        Command::Layout(args) => cmd_layout(&load_config(args)?),
    }
}
