use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use linkbench_core::pipeline::{parse_config, report, run_evaluation, write_report};

/// Evaluate link prediction methods described by a config file.
#[derive(Debug, Parser)]
#[command(name = "linkbench", version)]
struct Args {
    /// INI config file
    config: PathBuf,

    /// Report directory (overrides output_dir from the config)
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Methods run in parallel per network and repeat
    #[arg(long)]
    workers: Option<usize>,

    /// Keep scratch directories of successful runs
    #[arg(long)]
    keep_scratch: bool,

    /// error, warn, info, debug or trace
    #[arg(long, default_value = "info")]
    log_level: log::LevelFilter,
}

fn run(args: Args) -> anyhow::Result<bool> {
    let mut config = parse_config(&args.config)?;
    if let Some(dir) = args.output_dir {
        let dir = if dir.is_absolute() {
            dir
        } else {
            std::env::current_dir()?.join(dir)
        };
        config.general.output_dir = dir.display().to_string();
    }
    if let Some(w) = args.workers {
        anyhow::ensure!(w >= 1, "--workers must be at least 1");
        config.general.workers = w;
    }
    config.general.keep_scratch |= args.keep_scratch;

    let out = config.output_dir();
    let report = run_evaluation(&config)?;
    write_report(&report, &out).with_context(|| format!("writing report to {}", out.display()))?;
    let ok = report.successes();
    log::info!(
        "{ok} of {} results succeeded; report in {}",
        report.results.len(),
        out.join(report::SUMMARY_TXT).display()
    );
    Ok(ok > 0)
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(args.log_level)
        .format_timestamp(None)
        .init();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: no method produced a result");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
