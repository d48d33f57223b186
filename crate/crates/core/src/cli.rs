//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{apply_overrides, RunManifest, ScenarioConfig, MANIFEST_VERSION};
use crate::engine::{simulate_paths, sweep, Execution, RunSummary};
use crate::error::ConfigError;
use crate::output::{
    self, read_bundle, report_csv, report_json, report_table, rows_csv, summary_table, sweep_rows,
    write_bundle, write_paths_csv, OutputError, ReportRow,
};
use crate::presets::{preset, PRESETS};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

pub const DEFAULT_PATHS: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "credit-cycles",
    version,
    about = "Bank credit cycles under noise-trader sentiment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write a run bundle.
    Run(RunArgs),
    /// Grid over one or two parameters.
    Sweep(SweepArgs),
    /// Compare run bundles.
    Report(ReportArgs),
    /// Print the named scenarios.
    ListPresets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub preset: Option<String>,
    /// `key = value` file applied over the preset or defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Manifest of an earlier run; reproduces it exactly.
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    pub manifest: Option<PathBuf>,
    /// Override one key, `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// `key=v1,v2,...`; give once or twice.
    #[arg(long, required = true, value_name = "KEY=V1,V2")]
    pub vary: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Bundle directories written by `run`.
    #[arg(required = true)]
    pub bundles: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Also write the CSV export here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Output(OutputError::Config(_)) => EXIT_VALIDATION,
            CliError::Output(_) | CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Scenario, label, paths and seed resolved from the flags.
pub fn resolve(args: &ScenarioArgs) -> Result<RunManifest, CliError> {
    let (mut label, mut config, mut paths, mut seed) = match &args.manifest {
        Some(path) => {
            let m = RunManifest::parse(&read_file(path)?)?;
            (m.label, m.config, m.paths, m.seed)
        }
        None => (
            "custom".to_string(),
            ScenarioConfig::default(),
            DEFAULT_PATHS,
            DEFAULT_SEED,
        ),
    };
    if let Some(name) = &args.preset {
        config = preset(name)?.config();
        label = name.clone();
    }
    if let Some(path) = &args.config {
        config = config.parse_onto(&read_file(path)?)?;
        if args.preset.is_none() {
            label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or(label);
        }
    }
    config = apply_overrides(config, &args.set)?;
    if let Some(p) = args.paths {
        paths = p;
    }
    if let Some(s) = args.seed {
        seed = s;
    }
    if paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".to_string()));
    }
    Ok(RunManifest {
        label,
        seed,
        paths,
        version: MANIFEST_VERSION.to_string(),
        config,
    })
}

fn run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let manifest = resolve(&args.scenario)?;
    let paths = simulate_paths(
        &manifest.config,
        manifest.paths,
        manifest.seed,
        Execution::default(),
    )?;
    let summary = RunSummary::from_paths(&paths, manifest.seed);
    let dir = write_bundle(&args.out, &manifest, &paths, &summary)?;
    match args.format {
        Format::Table => {
            write!(out, "{}", summary_table(&manifest.label, &summary)).map_err(stdout_err)?;
            writeln!(out, "bundle: {}", dir.display()).map_err(stdout_err)?;
        }
        Format::Json => {
            let json = serde_json::to_string_pretty(&summary).map_err(OutputError::from)?;
            writeln!(out, "{json}").map_err(stdout_err)?;
        }
        Format::Csv => write_paths_csv(&mut *out, &paths)?,
    }
    Ok(())
}

fn parse_vary(items: &[String]) -> Result<Vec<(String, Vec<String>)>, CliError> {
    if items.len() > 2 {
        return Err(CliError::Usage(
            "--vary may be given at most twice".to_string(),
        ));
    }
    items
        .iter()
        .map(|item| {
            let (k, vs) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--vary expects key=v1,v2: `{item}`")))?;
            let values: Vec<String> = vs
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            Ok((k.trim().to_string(), values))
        })
        .collect()
}

fn run_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let manifest = resolve(&args.scenario)?;
    let grid = parse_vary(&args.vary)?;
    let points = sweep(
        &manifest.config,
        &grid,
        manifest.paths,
        manifest.seed,
        Execution::default(),
    )?;
    let (headers, rows) = sweep_rows(&points);
    let csv_text = rows_csv(&headers, &rows)?;
    if let Some(dir) = &args.out {
        let keys: Vec<&str> = grid.iter().map(|(k, _)| k.as_str()).collect();
        let dir = dir.join(format!(
            "{}-sweep-{}-seed{}-paths{}",
            manifest.label,
            keys.join("-"),
            manifest.seed,
            manifest.paths
        ));
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        write_file(&dir.join("sweep.csv"), &csv_text)?;
        write_file(&dir.join(output::MANIFEST_FILE), &manifest.emit())?;
    }
    match args.format {
        Format::Table => write!(out, "{}", output::render_table(&headers, &rows)),
        Format::Csv => write!(out, "{csv_text}"),
        Format::Json => {
            let json = serde_json::to_string_pretty(&points).map_err(OutputError::from)?;
            writeln!(out, "{json}")
        }
    }
    .map_err(stdout_err)
}

fn report(args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = args
        .bundles
        .iter()
        .map(|dir| {
            let b = read_bundle(dir)?;
            Ok(ReportRow::new(&b.manifest.label, &b.summary))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let csv_text = report_csv(&rows)?;
    if let Some(path) = &args.out {
        write_file(path, &csv_text)?;
    }
    match args.format {
        Format::Table => write!(out, "{}", report_table(&rows)),
        Format::Csv => write!(out, "{csv_text}"),
        Format::Json => write!(out, "{}", report_json(&rows)?),
    }
    .map_err(stdout_err)
}

fn list_presets(out: &mut dyn Write) -> Result<(), CliError> {
    let headers = vec![
        "preset".to_string(),
        "case".to_string(),
        "expected".to_string(),
    ];
    let rows: Vec<Vec<String>> = PRESETS
        .iter()
        .map(|p| {
            vec![
                p.name.to_string(),
                p.case.to_string(),
                p.expected.to_string(),
            ]
        })
        .collect();
    write!(out, "{}", output::render_table(&headers, &rows)).map_err(stdout_err)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => run(args, out),
        Command::Sweep(args) => run_sweep(args, out),
        Command::Report(args) => report(args, out),
        Command::ListPresets => list_presets(out),
    }
}
