//! Command-line entry point: wires configuration, ingestion, diagnostics,
//! agents, and report emission into one pipeline run.
//!
//! Exit codes: 0 success, 1 config error, 2 ingestion error, 3 agent
//! error, 4 output error. Every non-zero exit prints exactly one
//! classified `error[...]` line on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wxreport::config::ConfigError;
use wxreport::pipeline::{
    run_diagnostics, run_fetch, run_report, write_diagnose_bundle, write_fetch_bundle,
    write_report_bundle, PipelineError,
};
use wxreport::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "wxreport",
    version,
    about = "Explainable weather report generation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch and validate the three input sources; persist raw payloads
    /// and a validation summary.
    Fetch(RunArgs),
    /// Run the deterministic diagnostics (fronts, anomalies, hazards) and
    /// write the findings.
    Diagnose(RunArgs),
    /// Run the full pipeline and write the report bundle.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Location override: "LAT,LON" or "LAT,LON,NAME".
    #[arg(long)]
    location: Option<String>,
    /// Forecast horizon in hours (1–120).
    #[arg(long)]
    horizon: Option<u32>,
    /// Force fixture sources and the mock provider.
    #[arg(long)]
    offline: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Preference override, repeatable: tone=technical, audience=expert.
    #[arg(long = "prefs", value_name = "KEY=VALUE")]
    prefs: Vec<String>,
    /// Dump every assembled prompt under the output directory.
    #[arg(long)]
    debug_prompts: bool,
}

fn build_config(args: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(spec) = &args.location {
        apply_location(&mut config, spec)?;
    }
    if let Some(horizon) = args.horizon {
        config.horizon_hours = horizon;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    for pref in &args.prefs {
        let (key, value) = pref.split_once('=').ok_or_else(|| {
            PipelineError::Config(ConfigError(format!(
                "--prefs expects KEY=VALUE, got `{pref}`"
            )))
        })?;
        match key {
            "tone" | "audience" => config.set(key, value)?,
            other => {
                return Err(PipelineError::Config(ConfigError(format!(
                    "unknown preference `{other}` (tone, audience)"
                ))))
            }
        }
    }
    if args.offline {
        config.set_offline();
    }
    if args.debug_prompts {
        config.debug_prompts = true;
    }
    config.validate()?;
    Ok(config)
}

fn apply_location(config: &mut PipelineConfig, spec: &str) -> Result<(), PipelineError> {
    let parts: Vec<&str> = spec.splitn(3, ',').map(str::trim).collect();
    if parts.len() < 2 {
        return Err(PipelineError::Config(ConfigError(format!(
            "--location expects LAT,LON[,NAME], got `{spec}`"
        ))));
    }
    let latitude: f64 = parts[0].parse().map_err(|_| {
        PipelineError::Config(ConfigError(format!("invalid latitude `{}`", parts[0])))
    })?;
    let longitude: f64 = parts[1].parse().map_err(|_| {
        PipelineError::Config(ConfigError(format!("invalid longitude `{}`", parts[1])))
    })?;
    config.location.latitude = latitude;
    config.location.longitude = longitude;
    if let Some(name) = parts.get(2) {
        config.location.name = (*name).to_string();
    }
    Ok(())
}

fn cmd_fetch(args: &RunArgs) -> Result<(), PipelineError> {
    let config = build_config(args)?;
    let outcome = run_fetch(&config)?;
    for line in outcome.summary_lines() {
        println!("{line}");
    }
    let written = write_fetch_bundle(&outcome, &config)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_diagnose(args: &RunArgs) -> Result<(), PipelineError> {
    let config = build_config(args)?;
    let fetched = run_fetch(&config)?;
    let outcome = run_diagnostics(&config, &fetched.series, &fetched.normals)?;
    print!("{}", outcome.to_table());
    let written = write_diagnose_bundle(&outcome, &config)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(args: &RunArgs) -> Result<(), PipelineError> {
    let config = build_config(args)?;
    let outcome = run_report(&config)?;
    for note in &outcome.notes {
        eprintln!("warning: {note}");
    }
    let written = write_report_bundle(&outcome, &config)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    println!(
        "report for {} complete ({} charts, {} warnings)",
        outcome.document.meta.location_name,
        outcome.document.charts.len(),
        outcome.document.warnings_section.len(),
    );
    Ok(())
}

fn error_class(code: i32) -> &'static str {
    match code {
        1 => "config",
        2 => "ingestion",
        3 => "agent",
        _ => "output",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Fetch(args) => cmd_fetch(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let code = error.exit_code();
            eprintln!("error[{}]: {error}", error_class(code));
            ExitCode::from(code as u8)
        }
    }
}
