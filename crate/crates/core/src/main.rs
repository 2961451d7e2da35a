use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use descent_engine::presheaf::{validate_shape, DescentShape, ShapeJson};
use descent_engine::scenarios::{builtin_names, run_scenario, Expectations, ObjectPolicy, Scenario, ShapeSource, Verdict};
use descent_engine::{Error, Result};

#[derive(Parser)]
#[command(name = "descent-engine", version, about = "Exact checks of descent and monadicity laws on finite presheaf shapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the enumeration budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Override the coefficients: set, vect-<prime> or vect-q.
    #[arg(long, global = true)]
    coeff: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the equations of a shape file.
    Validate { shape: PathBuf },
    /// Run a scenario file, a shape file or a builtin and print its verdict.
    Run {
        target: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List the embedded scenarios.
    ListBuiltins,
    /// Render a saved verdict, or run a target and render its verdict.
    Report {
        target: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Failures of the input, as opposed to failing laws.
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> std::result::Result<bool, InputError> {
    match &cli.command {
        Command::Validate { shape } => {
            let j: ShapeJson = serde_json::from_str(&read(shape)?).map_err(Error::from)?;
            let violations = validate_shape(&DescentShape::from_json(&j)?)?;
            if violations.is_empty() {
                println!("valid");
                return Ok(true);
            }
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(InputError(format!("shape violates\n  {}", lines.join("\n  "))))
        }
        Command::Run { target, format } => {
            let verdict = run_scenario(&load_scenario(cli, target)?)?;
            emit(&verdict, *format);
            Ok(verdict.passed())
        }
        Command::ListBuiltins => {
            for name in builtin_names() {
                let s = Scenario::builtin(name).expect("listed builtin");
                println!("{name}\t{}", s.description.unwrap_or_default());
            }
            Ok(true)
        }
        Command::Report { target, format } => {
            let saved = Path::new(target)
                .is_file()
                .then(|| read(Path::new(target)))
                .transpose()?
                .and_then(|text| serde_json::from_str::<Verdict>(&text).ok());
            let verdict = match saved {
                Some(v) => v,
                None => run_scenario(&load_scenario(cli, target)?)?,
            };
            emit(&verdict, *format);
            Ok(verdict.passed())
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// A builtin name, a scenario file, or a bare shape file run with default
/// objects; command-line overrides applied last.
fn load_scenario(cli: &Cli, target: &str) -> std::result::Result<Scenario, InputError> {
    let mut s = match Scenario::builtin(target) {
        Some(s) => s,
        None => {
            let path = Path::new(target);
            if !path.is_file() {
                return Err(InputError(format!(
                    "{target} is neither a file nor a builtin ({})",
                    builtin_names().join(", ")
                )));
            }
            let text = read(path)?;
            parse_target(&text, path).map_err(|e| InputError(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(budget) = cli.budget {
        s.budget = budget;
    }
    if let Some(coeff) = &cli.coeff {
        s.coeff = coeff.clone();
    }
    Ok(s)
}

fn parse_target(text: &str, path: &Path) -> Result<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("triples").is_some() {
        let shape: ShapeJson = serde_json::from_value(value)?;
        return Ok(Scenario {
            name: path.file_stem().map_or("shape".into(), |s| s.to_string_lossy().into_owned()),
            description: None,
            shape: ShapeSource::Explicit { shape },
            coeff: "set".into(),
            objects: ObjectPolicy::default(),
            battery: None,
            seed: 0,
            budget: descent_engine::coeff::DEFAULT_BUDGET,
            expect: Expectations::default(),
        });
    }
    Ok(serde_json::from_value(value)?)
}

fn emit(v: &Verdict, format: Format) {
    match format {
        Format::Json => println!("{}", v.to_json()),
        Format::Text => print!("{}", v.render_text()),
    }
}
