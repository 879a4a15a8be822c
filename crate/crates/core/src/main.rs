use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pupflow::report::render_report;
use pupflow::{scan, OutputFormat, ParseErrorPolicy, RunConfig, ScanMode};

#[derive(Parser)]
#[command(name = "pupflow", version, about = "Find security weaknesses in Puppet manifests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan manifests or directories of manifests.
    Scan(ScanArgs),
}

#[derive(clap::Args)]
struct ScanArgs {
    /// Files or directories; directories are searched for `*.pp`.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScanMode::Taint)]
    mode: ScanMode,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// JSON object of resource category to keywords, in priority order.
    #[arg(long, value_name = "FILE")]
    taxonomy: Option<PathBuf>,
    /// JSON object of predicate name to pattern list.
    #[arg(long, value_name = "FILE")]
    patterns: Option<PathBuf>,
    /// CSV with header `manifest_path,category,line`.
    #[arg(long, value_name = "FILE")]
    ground_truth: Option<PathBuf>,
    /// Exit with status 1 when anything is reported.
    #[arg(long)]
    fail_on_findings: bool,
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = "PUPFLOW_JOBS", default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = ParseErrorPolicy::Skip)]
    on_parse_error: ParseErrorPolicy,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn run(args: ScanArgs) -> Result<ExitCode, String> {
    let config = RunConfig {
        paths: args.paths,
        mode: args.mode,
        format: args.format,
        taxonomy: args.taxonomy,
        patterns: args.patterns,
        ground_truth: args.ground_truth,
        fail_on_findings: args.fail_on_findings,
        jobs: args.jobs,
        on_parse_error: args.on_parse_error,
    };
    let report = scan(&config).map_err(|e| e.to_string())?;
    let bytes = render_report(&report, config.format);
    match &args.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| format!("cannot write report: {e}"))?,
    }
    for skipped in &report.skipped {
        eprintln!("warning: skipped {}: {}", skipped.path, skipped.message);
    }
    Ok(if config.fail_on_findings && !report.findings.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Scan(args) => run(args).unwrap_or_else(|msg| {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }),
    }
}
