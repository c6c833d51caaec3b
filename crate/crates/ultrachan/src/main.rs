//! Scenario runner: executes declarative check suites and writes
//! deterministic JSON/CSV reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ultrachan::scenario::{bundled, bundled_scenarios, Report, ScenarioError, ScenarioFile};

#[derive(Parser)]
#[command(name = "ultrachan", about = "Group-averaged channel and ultrafilter-state scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory the report files are written to.
    #[arg(long, global = true, default_value = "reports")]
    report_dir: PathBuf,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Zero out per-check timings so reruns are byte-identical.
    #[arg(long, global = true)]
    fixed_clock: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: a TOML file path or a bundled scenario id.
    Run { scenario: String },
    /// List the bundled scenarios.
    List,
    /// Run every bundled scenario.
    VerifyAll,
}

fn load(spec: &str) -> Result<ScenarioFile, ScenarioError> {
    let path = Path::new(spec);
    if path.exists() {
        ScenarioFile::load(path)
    } else if let Some(s) = bundled(spec) {
        Ok(s)
    } else {
        Err(ScenarioError::Validation(format!(
            "`{spec}` is neither a file nor a bundled scenario id"
        )))
    }
}

fn write_report(cli: &Cli, report: &Report) -> std::io::Result<()> {
    std::fs::create_dir_all(&cli.report_dir)?;
    let (ext, body) = match cli.format {
        Format::Json => ("json", report.to_json()),
        Format::Csv => ("csv", report.to_csv()),
    };
    let path = cli.report_dir.join(format!("{}.{ext}", report.scenario));
    std::fs::write(&path, body)?;
    Ok(())
}

fn run_one(cli: &Cli, spec: &str) -> Result<bool, ScenarioError> {
    let scenario = load(spec)?;
    let report = scenario.run(cli.seed, cli.fixed_clock)?;
    write_report(cli, &report)?;
    for r in &report.records {
        println!(
            "{:<32} {:<24} {}",
            report.scenario,
            r.id,
            match r.verdict {
                ultrachan::scenario::Verdict::Pass => "PASS",
                ultrachan::scenario::Verdict::Fail => "FAIL",
                ultrachan::scenario::Verdict::Inconclusive => "INCONCLUSIVE",
            }
        );
    }
    println!(
        "{:<32} => {}",
        report.scenario,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { scenario } => match run_one(&cli, scenario) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::List => {
            let mut entries = bundled_scenarios();
            entries.sort_by_key(|(id, _, _)| *id);
            match cli.format {
                Format::Json => {
                    let ids: Vec<&str> = entries.iter().map(|(id, _, _)| *id).collect();
                    println!("{}", serde_json::to_string_pretty(&ids).expect("serializable"));
                }
                Format::Csv => {
                    for (id, desc, _) in entries {
                        println!("{id:<24} {desc}");
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::VerifyAll => {
            let mut all_pass = true;
            for (id, _, _) in bundled_scenarios() {
                match run_one(&cli, id) {
                    Ok(pass) => all_pass &= pass,
                    Err(e) => {
                        eprintln!("error in `{id}`: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
