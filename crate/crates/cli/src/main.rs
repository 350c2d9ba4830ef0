//! `trobust`: fit Student-t regressions, estimate `ν`, run simulation studies.

mod report;
mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trobust::data::STACKLOSS_CSV;
use trobust::estimators::{estimate_nu, fit_huber, fit_ols, two_stage_fit, FitResult, HuberConfig, NuMethod};
use trobust::sim::{preset, preset_names, run_study_with, Execution, SimulationSpec, StudyMethod};
use trobust::{read_csv, Dataset, Error, OptimControl};

/// Name that selects the bundled stack-loss data instead of a file.
const BUNDLED: &str = "@stackloss";

#[derive(Parser)]
#[command(name = "trobust", version, about = "Student-t linear regression with estimated degrees of freedom")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a CSV file
    Fit(FitArgs),
    /// Estimate nu with all four estimators
    EstimateNu(InputArgs),
    /// Run a simulation study from a preset or a spec file
    Simulate(SimArgs),
    /// List the built-in study presets
    Presets,
}

#[derive(Args)]
struct InputArgs {
    /// CSV file with a header row, or `@stackloss` for the bundled data
    input: String,
    /// Response column (defaults to `stack_loss` for the bundled data)
    #[arg(long)]
    response: Option<String>,
    /// Prepend a column of ones to the predictors
    #[arg(long)]
    add_intercept: bool,
    /// Text summary or the full serialized result
    #[arg(long, value_enum, default_value_t = Output::Text)]
    format: Output,
    /// Also write a long-format table (.csv or .json)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// profile, adjusted (default), jeffreys, pseudo, fixed:<nu>, ols, huber, huber:auto or huber:<c>
    #[arg(long)]
    method: Option<String>,
    /// Fix nu; shorthand for `--method fixed:<nu>`
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Args)]
struct SimArgs {
    /// Built-in study (see `trobust presets`)
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<String>,
    /// JSON file with the study fields
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Worker threads; 1 runs sequentially
    #[arg(long, env = "TROBUST_THREADS")]
    threads: Option<usize>,
    /// Use the 500-replication preset size
    #[arg(long)]
    full: bool,
    /// Directory for `<name>.json` (report) and `<name>.csv` (long table)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

/// Exit status 2 for bad input, 3 when the numerics break down.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate { .. }
            | Error::NonConvergence { .. }
            | Error::Singular { .. }
            | Error::NumericOverflow { .. }
            | Error::Domain { .. } => Failure::Numeric(e.to_string()),
            Error::Dimension(_) | Error::InvalidSpec { .. } | Error::Parse { .. } => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::EstimateNu(args) => cmd_estimate_nu(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Presets => preset_names().iter().try_for_each(|n| writeln!(io::stdout(), "{n}")).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load(args: &InputArgs) -> Result<Dataset, Failure> {
    if args.input == BUNDLED {
        let response = args.response.as_deref().unwrap_or("stack_loss");
        return Ok(read_csv(STACKLOSS_CSV.as_bytes(), response, args.add_intercept)?);
    }
    let response = args.response.as_deref().ok_or_else(|| Failure::Usage("--response is required".into()))?;
    let file = File::open(&args.input).map_err(|e| Failure::Usage(format!("{}: {e}", args.input)))?;
    Ok(read_csv(BufReader::new(file), response, args.add_intercept)?)
}

fn parse_method(method: Option<&str>, nu: Option<f64>) -> Result<StudyMethod, Failure> {
    match (method, nu) {
        (None, None) => Ok(StudyMethod::Nu(NuMethod::AdjustedProfile)),
        (Some(m), None) => Ok(m.parse()?),
        (None | Some("fixed"), Some(nu)) => Ok(format!("fixed:{nu}").parse()?),
        (Some(m), Some(_)) => Err(Failure::Usage(format!("--nu cannot be combined with --method {m}"))),
    }
}

fn fit(data: &Dataset, method: StudyMethod) -> Result<FitResult, Failure> {
    let ctl = OptimControl::default();
    Ok(match method {
        StudyMethod::Nu(m) => two_stage_fit(m, data, &ctl)?,
        StudyMethod::Ols => fit_ols(data)?,
        StudyMethod::Huber(tuning) => fit_huber(data, &HuberConfig { tuning, ..HuberConfig::default() })?,
    })
}

fn emit_table(table: &table::TableArtifact, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = out {
        table.write_file(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let data = load(&args.input)?;
    let method = parse_method(args.method.as_deref(), args.nu)?;
    let result = fit(&data, method)?;
    let mut stdout = io::stdout().lock();
    match args.input.format {
        Output::Json => {
            serde_json::to_writer_pretty(&mut stdout, &result).map_err(io::Error::from)?;
            writeln!(stdout)?;
        }
        Output::Text => report::print_fit(&mut stdout, &data, &method.to_string(), &result)?,
    }
    emit_table(&report::fit_table(&data, &method.to_string(), &result), args.input.out.as_deref())
}

fn cmd_estimate_nu(args: &InputArgs) -> Result<(), Failure> {
    let data = load(args)?;
    let ctl = OptimControl::default();
    let results = NuMethod::ESTIMATED
        .iter()
        .map(|&m| estimate_nu(m, &data, &ctl))
        .collect::<trobust::Result<Vec<_>>>()?;
    let mut stdout = io::stdout().lock();
    match args.format {
        Output::Json => {
            serde_json::to_writer_pretty(&mut stdout, &results).map_err(io::Error::from)?;
            writeln!(stdout)?;
        }
        Output::Text => report::print_nu(&mut stdout, &data, &results)?,
    }
    emit_table(&report::nu_table(&data, &results), args.out.as_deref())
}

fn load_spec(args: &SimArgs) -> Result<SimulationSpec, Failure> {
    let mut spec = match (&args.preset, &args.spec) {
        (Some(name), _) => preset(name, args.full)?,
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(Failure::Usage("either --preset or --spec is required".into())),
    };
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if spec.name.is_empty() {
        spec.name = args
            .spec
            .as_deref()
            .and_then(|p| p.file_stem())
            .map_or_else(|| "study".into(), |s| s.to_string_lossy().into_owned());
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_simulate(args: &SimArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let exec = match args.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(1) => Execution::Sequential,
        Some(t) => Execution::Threads(t),
        None => Execution::Parallel,
    };
    let report = run_study_with(&spec, exec)?;
    let mut stdout = io::stdout().lock();
    report::print_study(&mut stdout, &report)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        let json = dir.join(format!("{}.json", report.name));
        let mut file = io::BufWriter::new(File::create(&json)?);
        serde_json::to_writer_pretty(&mut file, &report).map_err(io::Error::from)?;
        writeln!(file)?;
        emit_table(&report::study_table(&report), Some(&dir.join(format!("{}.csv", report.name))))?;
        writeln!(stdout, "wrote {} and {}.csv", json.display(), dir.join(&report.name).display())?;
    }
    Ok(())
}
