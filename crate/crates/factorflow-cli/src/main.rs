use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use factorflow::harness::config::apply_override;
use factorflow::harness::report::write_text;
use factorflow::harness::{
    denoise_experiment, divergence_probes, plateau_experiment, predict, random_init_experiment, run_scenario,
    sweep_bracket, Check, ConfigError, HarnessError, Report, ScenarioConfig, SweepGrid,
};

#[derive(Parser)]
#[command(
    name = "factorflow",
    version,
    about = "Simulate deep matrix factorization dynamics and check them against closed-form predictions",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and emit its trajectory and invariant checks
    Simulate(ScenarioArgs),
    /// Print the predicted hit times and error bounds of a scenario as JSON
    Predict(ScenarioArgs),
    /// Predicted effective-rank plateau windows, checked against a simulation
    Plateau(ScenarioArgs),
    /// Compare empirical hit times with the predicted bracket over a parameter grid
    Sweep(OptionalConfigArgs),
    /// Early-stopping denoising run against the clean low-rank target
    Denoise(ScenarioArgs),
    /// Probe the divergence and convergence step-size thresholds on a fixed grid
    Diverge(OutputArgs),
    /// Random scaled-identity initializations over a grid of scales and seeds
    Randinit(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write machine output here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; defaults to csv for a .csv output path, json otherwise
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario config (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override a config field, e.g. --set eta=0.001 or --set init.alpha=0.1 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OptionalConfigArgs {
    /// Sweep grid (JSON); the default grid is used when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a grid field, e.g. --set depths=[2,3] (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Machine-readable output in both formats.
struct Output {
    json: Result<String, String>,
    csv: Option<String>,
}

fn json_of<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value).map_err(|e| e.to_string())
}

fn report_output(report: &Report) -> Output {
    Output { json: report.to_json().map_err(|e| e.to_string()), csv: Some(report.to_csv()) }
}

fn deliver(output: Output, args: &OutputArgs) -> Result<(), Failure> {
    let csv_path = args.out.as_deref().and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let format = args.format.unwrap_or(if csv_path { OutFormat::Csv } else { OutFormat::Json });
    let text = match format {
        OutFormat::Json => output.json.map_err(Failure::Run)?,
        OutFormat::Csv => output.csv.ok_or_else(|| Failure::Usage("this subcommand only emits json".into()))?,
    };
    match &args.out {
        Some(path) => write_text(path, &text).map_err(|e| Failure::Run(e.to_string())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

/// Every check is listed for short reports; longer ones list failures and a tally.
const LIST_ALL_UP_TO: usize = 40;

fn summarize(checks: &[Check]) -> bool {
    let list_all = checks.len() <= LIST_ALL_UP_TO;
    let (mut failed, mut notes, mut skipped) = (0, 0, 0);
    for c in checks {
        let status = match (c.passed, c.enforced) {
            (None, _) => {
                skipped += 1;
                "SKIP"
            }
            (Some(true), _) => "ok",
            (Some(false), true) => {
                failed += 1;
                "FAIL"
            }
            (Some(false), false) => {
                notes += 1;
                "note"
            }
        };
        if list_all || c.failed() {
            eprintln!("{status:>4}  {}: {}", c.name, c.detail);
        }
    }
    let tally = format!("{} checks, {notes} advisory notes, {skipped} skipped", checks.len());
    if failed == 0 {
        eprintln!("all enforced checks passed ({tally})");
    } else {
        eprintln!("{failed} enforced check(s) failed ({tally})");
    }
    failed == 0
}

fn load(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    Ok(ScenarioConfig::load(&args.config, &args.overrides)?)
}

fn load_grid(args: &OptionalConfigArgs) -> Result<SweepGrid, Failure> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Value::Object(Default::default()),
    };
    for o in &args.overrides {
        apply_override(&mut doc, o)?;
    }
    serde_json::from_value(doc).map_err(|e| Failure::Usage(format!("invalid sweep grid: {e}")))
}

fn run_report(args: &ScenarioArgs, f: fn(&ScenarioConfig) -> Result<Report, HarnessError>) -> Result<bool, Failure> {
    let cfg = load(args)?;
    let report = f(&cfg)?;
    deliver(report_output(&report), &args.output)?;
    Ok(summarize(&report.checks))
}

fn dispatch(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Simulate(args) => run_report(&args, run_scenario),
        Command::Plateau(args) => run_report(&args, plateau_experiment),
        Command::Denoise(args) => run_report(&args, denoise_experiment),
        Command::Randinit(args) => run_report(&args, random_init_experiment),
        Command::Predict(args) => {
            let cfg = load(&args)?;
            let (bundles, checks) = predict(&cfg)?;
            for b in &bundles {
                if !b.violations.is_empty() {
                    eprintln!("note  lambda = {}, epsilon = {}: {}", b.lambda, b.epsilon, b.violations.join("; "));
                }
            }
            deliver(Output { json: json_of(&bundles), csv: None }, &args.output)?;
            Ok(summarize(&checks))
        }
        Command::Sweep(args) => {
            let grid = load_grid(&args)?;
            let table = sweep_bracket(&grid);
            deliver(Output { json: json_of(&table), csv: Some(table.to_csv()) }, &args.output)?;
            Ok(summarize(&table.checks))
        }
        Command::Diverge(output) => {
            let probes = divergence_probes()?;
            deliver(Output { json: json_of(&probes), csv: Some(probes.to_csv()) }, &output)?;
            Ok(summarize(&probes.checks))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
