//! `raycover` — command-line front end for the coverage engine.
//!
//! Three subcommands cover the usual workflow:
//!
//! * `trace`  — run the full pipeline (trace, analyze, export) for a scene
//!   and a deployment config;
//! * `report` — recompute the service-coverage statistics from a previously
//!   exported SINR field;
//! * `render` — turn exported field files into heatmap PNGs.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 scene error,
//! 3 anything else (tracing, analysis, I/O).

use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{Args, Parser, Subcommand};
use raycover::error::{ConfigError, RunError};
use raycover::{
    coverage_report, load_config, read_field, render_heatmap, run_pipeline, spectral_efficiency,
    throughput, write_png, Combining, DeploymentConfig, FieldFormat, RenderOptions, RunOptions,
    ThroughputField,
};

#[derive(Parser)]
#[command(
    name = "raycover",
    version,
    about = "Deterministic ray-traced radio coverage maps and service analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a deployment and export fields, reports and a run manifest.
    Trace(TraceArgs),
    /// Recompute service coverage from an exported SINR field.
    Report(ReportArgs),
    /// Render exported fields as heatmap PNGs.
    Render(RenderArgs),
}

#[derive(Args)]
struct TraceArgs {
    /// Scene geometry (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Deployment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output-dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a positive number, or "auto" for one per core.
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,
    /// Field file format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: FieldFormat,
    /// Override the config's phasor combining mode.
    #[arg(long, value_parser = parse_combining)]
    combining: Option<Combining>,
    /// Suppress per-site progress lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Deployment configuration (TOML) — supplies bandwidth and thresholds.
    #[arg(long)]
    config: PathBuf,
    /// Directory holding the exported fields; defaults to the config's
    /// `output-dir`.
    #[arg(long)]
    fields: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Directory holding the exported fields.
    #[arg(long)]
    fields: PathBuf,
    /// Output directory for PNGs; defaults to the fields directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field stems to render (repeatable).
    #[arg(long = "field", default_values_t = default_render_fields())]
    field: Vec<String>,
    /// Lower colour-scale bound in dB; defaults to the field minimum.
    #[arg(long, allow_negative_numbers = true)]
    db_min: Option<f64>,
    /// Upper colour-scale bound in dB; defaults to the field maximum.
    #[arg(long, allow_negative_numbers = true)]
    db_max: Option<f64>,
    /// Pixels per grid cell.
    #[arg(long, default_value_t = 4)]
    cell_px: u32,
    /// Optional deployment config; when given, transmitter sites are drawn
    /// as markers.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum Threads {
    Auto,
    Count(usize),
}

fn default_render_fields() -> Vec<String> {
    vec!["path_gain".into(), "rss".into(), "sinr".into()]
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Threads::Count(n)),
        _ => Err(format!("expected a positive integer or \"auto\", got {s:?}")),
    }
}

fn parse_format(s: &str) -> Result<FieldFormat, String> {
    match s {
        "csv" => Ok(FieldFormat::Csv),
        "binary" | "bin" => Ok(FieldFormat::Binary),
        other => Err(format!("expected \"csv\" or \"binary\", got {other:?}")),
    }
}

fn parse_combining(s: &str) -> Result<Combining, String> {
    match s {
        "coherent" => Ok(Combining::Coherent),
        "incoherent" => Ok(Combining::Incoherent),
        other => Err(format!("expected \"coherent\" or \"incoherent\", got {other:?}")),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            exit(code);
        }
    };
    let result = match cli.command {
        Command::Trace(args) => run_trace(&args),
        Command::Report(args) => run_report(&args),
        Command::Render(args) => run_render(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        exit(exit_code(&err));
    }
}

fn exit_code(err: &RunError) -> i32 {
    match err {
        RunError::Config(_) => 1,
        RunError::Scene(_) => 2,
        _ => 3,
    }
}

fn run_trace(args: &TraceArgs) -> Result<(), RunError> {
    let config = load_config(&args.config)?;
    let options = RunOptions {
        out_dir: args.out.clone(),
        format: args.format,
        combining: args.combining,
        threads: match args.threads {
            Threads::Auto => None,
            Threads::Count(n) => Some(n),
        },
        quiet: args.quiet,
    };
    let manifest = run_pipeline(&config, &args.scene, &options)?;
    for warning in &manifest.truncation_warnings {
        eprintln!("warning: {warning}");
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    println!(
        "traced {} site(s) over a {}x{} grid ({} valid cells) in {:.2} s",
        config.transmitters.len(),
        manifest.grid.nx,
        manifest.grid.ny,
        manifest.grid.valid_cells,
        manifest.wall_time_s
    );
    println!("wrote {} artifacts to {}", manifest.outputs.len() + 1, out_dir.display());
    // Echo the coverage summary from the field that was just written so the
    // numbers on screen are exactly the numbers on disk.
    let report = report_from_dir(&config, &out_dir)?;
    print!("{report}");
    Ok(())
}

fn run_report(args: &ReportArgs) -> Result<(), RunError> {
    let config = load_config(&args.config)?;
    let dir = args
        .fields
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let report = report_from_dir(&config, &dir)?;
    print!("{report}");
    println!("note: margin statistics are produced at trace time (macro_diversity.json)");
    Ok(())
}

/// Rebuild the serving-rate field from the exported SINR plane and render
/// the coverage summary. Field files round-trip exactly, so this reproduces
/// the trace-time report bit for bit.
fn report_from_dir(config: &DeploymentConfig, dir: &Path) -> Result<String, RunError> {
    let field = read_field(&locate_field(dir, "sinr")?)?;
    let bandwidth_hz = config.bandwidth_hz;
    let rate_bps = field
        .values
        .iter()
        .map(|&sinr_db| {
            if sinr_db.is_nan() {
                f64::NAN
            } else {
                throughput(spectral_efficiency(10f64.powf(sinr_db / 10.0)), bandwidth_hz)
            }
        })
        .collect();
    let rates = ThroughputField { rate_bps, bandwidth_hz };
    let report = coverage_report(&rates, &config.service_thresholds()?)?;
    Ok(report.render_text())
}

/// Find `<stem>.csv` or `<stem>.bin` under `dir`.
fn locate_field(dir: &Path, stem: &str) -> Result<PathBuf, RunError> {
    for ext in ["csv", "bin"] {
        let candidate = dir.join(format!("{stem}.{ext}"));
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(RunError::Config(ConfigError::Validation(format!(
        "no field file {stem}.csv or {stem}.bin in {}",
        dir.display()
    ))))
}

fn run_render(args: &RenderArgs) -> Result<(), RunError> {
    let out_dir = args.out.clone().unwrap_or_else(|| args.fields.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Runtime(format!("create {}: {e}", out_dir.display())))?;
    let markers: Vec<(f64, f64)> = match &args.config {
        Some(path) => load_config(path)?
            .transmitters
            .iter()
            .map(|t| (t.position[0], t.position[1]))
            .collect(),
        None => Vec::new(),
    };
    for stem in &args.field {
        let field = read_field(&locate_field(&args.fields, stem)?)?;
        let (db_min, db_max) = scale_bounds(&field.values, args.db_min, args.db_max, stem)?;
        let options = RenderOptions {
            db_min,
            db_max,
            cell_px: args.cell_px,
            markers: markers.clone(),
        };
        let image = render_heatmap(&field, &options)?;
        let path = out_dir.join(format!("{stem}.png"));
        write_png(&path, &image)?;
        println!(
            "rendered {stem} ({}x{} cells, scale {:.1}..{:.1} dB) to {}",
            field.meta.nx,
            field.meta.ny,
            db_min,
            db_max,
            path.display()
        );
    }
    Ok(())
}

/// Colour-scale bounds: explicit flags win, otherwise the finite extent of
/// the data (widened by half a dB when the field is flat).
fn scale_bounds(
    values: &[f64],
    db_min: Option<f64>,
    db_max: Option<f64>,
    stem: &str,
) -> Result<(f64, f64), RunError> {
    if let (Some(lo), Some(hi)) = (db_min, db_max) {
        return Ok((lo, hi));
    }
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(RunError::Render(format!(
            "field {stem} has no finite values; pass --db-min/--db-max"
        )));
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (db_min.unwrap_or(lo), db_max.unwrap_or(hi));
    if lo >= hi {
        lo -= 0.5;
        hi += 0.5;
    }
    Ok((lo, hi))
}
