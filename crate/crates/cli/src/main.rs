use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crossclass_cli::ops::{
    cmd_bounds_event, cmd_bounds_mean, cmd_bounds_quantile, cmd_oracle_check, fixtures_listing,
    AssumeChoice, EventOptions, MethodChoice, OracleCheckOptions,
};
use crossclass_cli::report::{render_report, Format, Report};
use crossclass_cli::schema::{parse_scenario_str, realize, LoadedScenario, ScenarioFile, WxSpec};
use crossclass_cli::{csvio, fixtures, CliError};

/// Identification bounds for outcome rates when group labels come from two
/// different classification schemes.
#[derive(Parser)]
#[command(name = "crossclass", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every violation.
    Validate(ScenarioArgs),
    /// Bound features of P(y|x).
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Cross-check the LP bounds against independent grid enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Bundled example scenarios.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Bounds on the event probability P(y=1|x).
    Event(EventArgs),
    /// Bounds on the conditional mean E(y|x).
    Mean(MeanArgs),
    /// Bounds on a conditional quantile of P(y|x).
    Quantile(QuantileArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare LP bounds with grid-enumeration bounds.
    Check(OracleArgs),
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// List the bundled scenarios.
    List,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file path, or the name of a bundled fixture.
    #[arg(long)]
    scenario: String,
    /// Replace the scenario's wx block with counts from a CSV table
    /// (header row = x labels, first column = w labels).
    #[arg(long)]
    wx_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TargetArgs {
    /// Bound this x label (defaults to the file's target_x, else all).
    #[arg(long, conflicts_with = "all_targets")]
    target: Option<String>,
    /// Bound every x label.
    #[arg(long)]
    all_targets: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    ClosedForm,
    Lp,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AssumeArg {
    MarginalsOnly,
    Candidates,
}

#[derive(Args)]
struct EventArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    targets: TargetArgs,
    /// Bound computation route; auto picks the closed form where it applies.
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Bounded-variation cap `label=delta` (repeatable; `inf` lifts a
    /// file-level cap).
    #[arg(long = "bv", value_name = "LABEL=DELTA")]
    bv: Vec<String>,
    /// Points for the marginals-only sweep.
    #[arg(long, default_value_t = crossclass::sharp::DEFAULT_GRID_N)]
    grid_n: usize,
    /// Downgrade joint knowledge before bounding.
    #[arg(long, value_enum)]
    assume: Option<AssumeArg>,
    /// Assert the target category is nested: every x=target member is
    /// w=target.
    #[arg(long)]
    assume_nested: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct MeanArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    targets: TargetArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct QuantileArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    targets: TargetArgs,
    /// Quantile level in (0, 1).
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    targets: TargetArgs,
    /// Grid spacing.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Row-equality tolerance (default: step times the number of x labels).
    #[arg(long)]
    constraint_tol: Option<f64>,
    /// Cap on enumerated grid nodes.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(args: &ScenarioArgs) -> Result<(ScenarioFile, LoadedScenario), CliError> {
    let text = fixtures::resolve_scenario_text(&args.scenario)
        .ok_or_else(|| {
            CliError::Validation(format!(
                "'{}' is neither a readable file nor a bundled fixture",
                args.scenario
            ))
        })?
        .map_err(|e| CliError::Validation(format!("cannot read '{}': {e}", args.scenario)))?;
    let mut file = parse_scenario_str(&text)?;

    if let Some(csv_path) = &args.wx_csv {
        if matches!(file.wx, WxSpec::Shares(_)) {
            return Err(CliError::Usage(
                "--wx-csv replaces a joint; this scenario uses subgroup shares".into(),
            ));
        }
        let counts = csvio::load_counts_csv(csv_path)?;
        if counts.w_labels != file.w_labels || counts.x_labels != file.x_labels {
            return Err(CliError::Validation(format!(
                "labels in {} do not match the scenario's label sets",
                csv_path.display()
            )));
        }
        file.wx = WxSpec::JointCounts(counts.counts);
    }

    let (loaded, violations) = realize(&file);
    match loaded {
        Some(l) => Ok((file, l)),
        None => Err(CliError::Validation(format!(
            "'{}' is not a valid scenario:\n  - {}",
            args.scenario,
            violations.join("\n  - ")
        ))),
    }
}

fn parse_bv(args: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    args.iter()
        .map(|raw| {
            let (label, value) = raw
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--bv expects LABEL=DELTA, got '{raw}'")))?;
            let delta: f64 = value
                .parse()
                .map_err(|_| CliError::Usage(format!("--bv delta '{value}' is not a number")))?;
            if delta.is_nan() || delta < 0.0 {
                return Err(CliError::Usage(format!(
                    "--bv delta must be nonnegative, got {delta}"
                )));
            }
            Ok((label.to_string(), delta))
        })
        .collect()
}

fn emit(report: &Report, format: FormatArg) {
    let fmt = match format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    print!("{}", render_report(report, fmt));
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(args) => {
            let (_, _) = load(&args)?;
            println!("OK: '{}' is a valid scenario", args.scenario);
            Ok(())
        }
        Command::Bounds(BoundsCommand::Event(args)) => {
            let (file, loaded) = load(&args.scenario)?;
            let opts = EventOptions {
                target: args.targets.target.clone(),
                all_targets: args.targets.all_targets,
                method: match args.method {
                    MethodArg::Auto => MethodChoice::Auto,
                    MethodArg::ClosedForm => MethodChoice::ClosedForm,
                    MethodArg::Lp => MethodChoice::Lp,
                },
                bv: parse_bv(&args.bv)?,
                grid_n: args.grid_n,
                assume: args.assume.map(|a| match a {
                    AssumeArg::MarginalsOnly => AssumeChoice::MarginalsOnly,
                    AssumeArg::Candidates => AssumeChoice::Candidates,
                }),
                assume_nested: args.assume_nested,
            };
            let report = cmd_bounds_event(&file, &loaded, &opts)?;
            emit(&report, args.format);
            Ok(())
        }
        Command::Bounds(BoundsCommand::Mean(args)) => {
            let (file, loaded) = load(&args.scenario)?;
            let report = cmd_bounds_mean(
                &file,
                &loaded,
                &args.targets.target,
                args.targets.all_targets,
            )?;
            emit(&report, args.format);
            Ok(())
        }
        Command::Bounds(BoundsCommand::Quantile(args)) => {
            if !(args.alpha > 0.0 && args.alpha < 1.0) {
                return Err(CliError::Usage(format!(
                    "--alpha must lie in (0, 1), got {}",
                    args.alpha
                )));
            }
            let (file, loaded) = load(&args.scenario)?;
            let report = cmd_bounds_quantile(
                &file,
                &loaded,
                &args.targets.target,
                args.targets.all_targets,
                args.alpha,
            )?;
            emit(&report, args.format);
            Ok(())
        }
        Command::Oracle(OracleCommand::Check(args)) => {
            let (file, loaded) = load(&args.scenario)?;
            let opts = OracleCheckOptions {
                target: args.targets.target.clone(),
                all_targets: args.targets.all_targets,
                step: args.step,
                constraint_tol: args.constraint_tol,
                budget: args.budget,
            };
            let (report, all_agree) = cmd_oracle_check(&file, &loaded, &opts)?;
            emit(&report, args.format);
            if all_agree {
                Ok(())
            } else {
                Err(CliError::Computation(
                    "oracle and LP bounds disagree beyond the provable slack".into(),
                ))
            }
        }
        Command::Fixtures(FixturesCommand::List) => {
            print!("{}", fixtures_listing());
            Ok(())
        }
    }
}
