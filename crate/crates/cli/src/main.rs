//! `htm`: run seed-deterministic prediction experiments, score naive
//! baselines, compare reports against bundled reference results, and emit the
//! toy datasets.
//!
//! Exit codes: 0 success, 2 data problem, 3 configuration problem (including
//! command-line misuse), 1 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use htm_core::config::ExperimentConfig;
use htm_core::data::{generate_periodic_binary, generate_times_table, word_fixture_text, Dataset};
use htm_core::error::{HtmError, Result};
use htm_core::pipeline::{build_comparison, run_baseline, run_experiment, BaselineKind};
use htm_core::report::ExperimentReport;

#[derive(Parser)]
#[command(
    name = "htm",
    about = "Cortical-learning sequence prediction experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run(RunArgs),
    /// Score a naive baseline over a labeled CSV file.
    Baseline(BaselineArgs),
    /// Render the comparison table for saved report files.
    Compare(CompareArgs),
    /// Write a toy dataset to a file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (flat `key = value` lines, `#` comments).
    #[arg(long)]
    config: PathBuf,
    /// Override the RNG seed (applied after --set).
    #[arg(long)]
    seed: Option<u64>,
    /// Override any config key (repeatable), e.g. --set iters=10.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the pooling-search curve as two-column CSV.
    #[arg(long, value_name = "PATH")]
    emit_curve: Option<PathBuf>,
    /// Write per-row predictions as CSV.
    #[arg(long, value_name = "PATH")]
    emit_predictions: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long, value_name = "PATH")]
    emit_report: Option<PathBuf>,
    /// Print the full report JSON to stdout instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BaselineArgs {
    /// Labeled CSV file (last column is the label).
    #[arg(long)]
    data: PathBuf,
    /// Baseline to score.
    #[arg(long, default_value = "majority_class")]
    kind: String,
    /// Skip the first CSV line.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Report JSON files; glob patterns are expanded and sorted.
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<String>,
    /// Emit CSV instead of Markdown.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct GenArgs {
    /// One of: times, periodic, word3a, word3b, word3c.
    #[arg(long)]
    toy: String,
    /// Output file (CSV for numeric toys, plain text for word fixtures).
    #[arg(long)]
    out: PathBuf,
    /// Largest factor of the times table.
    #[arg(long, default_value_t = 12)]
    limit: i64,
    /// Period of the periodic toy.
    #[arg(long, default_value_t = 12)]
    period: usize,
    /// Cycles of the periodic toy.
    #[arg(long, default_value_t = 10)]
    cycles: usize,
}

fn parse_set(pair: &str) -> Result<(&str, &str)> {
    pair.split_once('=')
        .ok_or_else(|| HtmError::config("--set", format!("expected KEY=VALUE, got `{pair}`")))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| HtmError::Data(format!("cannot write {}: {e}", path.display())))
}

fn summarize(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "dataset          {} ({} of {} rows{})\n",
        report.dataset.name,
        report.dataset.rows_used,
        report.dataset.total_rows,
        if report.dataset.truncated {
            ", truncated"
        } else {
            ""
        },
    ));
    out.push_str(&format!("config hash      {}\n", &report.config_hash[..16]));
    out.push_str(&format!(
        "pooling          best trial {} of {}, reconstruction MAPE {:.4}%\n",
        report.pooling.best_iteration + 1,
        report.pooling.iterations,
        report.pooling.best_mape,
    ));
    out.push_str(&format!(
        "temporal         {} steps, {} segments grown, bursting rate {:.3}\n",
        report.temporal.steps, report.temporal.segments_grown, report.temporal.bursting_rate,
    ));
    out.push_str(&format!(
        "predictions      {} accepted, {} rejected\n",
        report.metrics.accepted, report.metrics.rejected,
    ));
    out.push_str(&format!(
        "rmse (codes)     {:.4}\n",
        report.metrics.rmse_codes
    ));
    if let Some(rmse) = report.metrics.rmse_labels {
        out.push_str(&format!("rmse (labels)    {:.4}\n", rmse));
    }
    if let Some(mape) = report.metrics.mape {
        out.push_str(&format!("mape             {:.4}%\n", mape));
    }
    out.push_str(&format!(
        "accuracy         {:.2}%\n",
        report.metrics.accuracy
    ));
    if let Some(b) = &report.baseline {
        out.push_str(&format!("baseline         {} rmse {:.4}\n", b.kind, b.rmse));
    }
    out.push_str(&format!("wall clock       {} ms", report.wall_clock_ms));
    out
}

fn cmd_run(args: &RunArgs) -> Result<String> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    for pair in &args.set {
        let (key, value) = parse_set(pair)?;
        config.set(key, value)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run_experiment(&config)?;
    if let Some(path) = &args.emit_curve {
        write_file(path, &report.curve_csv())?;
    }
    if let Some(path) = &args.emit_predictions {
        write_file(path, &report.predictions_csv())?;
    }
    if let Some(path) = &args.emit_report {
        write_file(path, &report.to_json()?)?;
    }
    if args.json {
        Ok(report.to_json()?)
    } else {
        Ok(summarize(&report))
    }
}

fn cmd_baseline(args: &BaselineArgs) -> Result<String> {
    let kind: BaselineKind = args.kind.parse()?;
    let dataset = htm_core::data::load_csv(&args.data, true, args.header)?;
    let labels = dataset.labels.as_ref().expect("loaded with labels");
    let summary = run_baseline(labels, kind)?;
    Ok(format!(
        "baseline {} on {} ({} rows)\nrmse     {:.4}\naccuracy {:.2}%",
        summary.kind,
        dataset.name,
        labels.len(),
        summary.rmse,
        summary.accuracy,
    ))
}

fn cmd_compare(args: &CompareArgs) -> Result<String> {
    let mut paths = Vec::new();
    for pattern in &args.reports {
        // Try the pattern as a literal path first so non-glob filenames work
        // even when they contain glob metacharacters.
        if Path::new(pattern).is_file() {
            paths.push(PathBuf::from(pattern));
            continue;
        }
        let matches = glob::glob(pattern)
            .map_err(|e| HtmError::config("--reports", format!("bad pattern `{pattern}`: {e}")))?;
        let mut any = false;
        for entry in matches {
            let path = entry.map_err(|e| HtmError::Data(e.to_string()))?;
            if path.is_file() {
                paths.push(path);
                any = true;
            }
        }
        if !any {
            return Err(HtmError::Data(format!("no report files match `{pattern}`")));
        }
    }
    paths.sort();
    paths.dedup();
    let reports = paths
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path)
                .map_err(|e| HtmError::Data(format!("cannot read {}: {e}", path.display())))?;
            ExperimentReport::from_json(&text)
        })
        .collect::<Result<Vec<_>>>()?;
    let comparison = build_comparison(&reports)?;
    Ok(if args.csv {
        comparison.csv
    } else {
        comparison.markdown
    })
}

fn render_numeric_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    for row in dataset.unit_rows() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn cmd_gen(args: &GenArgs) -> Result<String> {
    let contents = match args.toy.as_str() {
        "times" => render_numeric_csv(&generate_times_table(args.limit)?),
        "periodic" => render_numeric_csv(&generate_periodic_binary(args.period, args.cycles)?),
        "word3a" | "word3b" | "word3c" => word_fixture_text(&args.toy)
            .expect("fixture names are matched above")
            .to_string(),
        other => {
            return Err(HtmError::config(
                "--toy",
                format!("expected times|periodic|word3a|word3b|word3c, got `{other}`"),
            ))
        }
    };
    write_file(&args.out, &contents)?;
    Ok(format!("wrote {}", args.out.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is a
            // configuration problem under the documented exit-code contract.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match outcome {
        Ok(text) => {
            // A closed pipe (e.g. the output being paged through `head`) is
            // not an error; anything else writing to stdout is.
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
