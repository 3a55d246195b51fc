use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pvm_algebra::Tolerances;
use pvm_algebra_cli::commands::{self, Report};
use pvm_algebra_cli::CliError;

#[derive(Parser)]
#[command(name = "pvmalg", version, about = "Commutants, spectral measures and generator checks on C^n")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
    #[arg(long, global = true)]
    value_tol: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, CliError> {
        let d = Tolerances::default();
        Ok(Tolerances::new(
            self.rank_tol.unwrap_or(d.rank_tol),
            self.residual_tol.unwrap_or(d.residual_tol),
            self.value_tol.unwrap_or(d.value_tol),
        )?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Basis of the commutant of an operator set (or a single matrix).
    Commutant { input: PathBuf, set: String },
    /// Basis of the bicommutant.
    Bicommutant {
        input: PathBuf,
        set: String,
        /// Add adjoints first, so the result is the generated von Neumann algebra.
        #[arg(long)]
        adjoint_close: bool,
    },
    /// Criterion and bicommutant oracle for `A(X) = A(P_E)`.
    CheckGenerates { input: PathBuf, measure: String, set: String },
    /// Whether a function family separates the non-null atoms.
    Separate {
        input: PathBuf,
        measure: String,
        #[arg(required = true)]
        functions: Vec<String>,
    },
    /// Spectral decomposition of a normal matrix.
    SpectralMeasure { input: PathBuf, matrix: String },
    /// Push-forward of a measure under the joint evaluation of a function family.
    Pushforward {
        input: PathBuf,
        measure: String,
        #[arg(required = true)]
        functions: Vec<String>,
    },
    /// Seeded random property campaign.
    Campaign {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Comma-separated scenario names; all six by default.
        #[arg(long)]
        scenarios: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let tol = cli.tol.resolve()?;
    match &cli.command {
        Command::Commutant { input, set } => commands::cmd_commutant(input, set, &tol),
        Command::Bicommutant {
            input,
            set,
            adjoint_close,
        } => commands::cmd_bicommutant(input, set, *adjoint_close, &tol),
        Command::CheckGenerates { input, measure, set } => commands::cmd_check_generates(input, measure, set, &tol),
        Command::Separate {
            input,
            measure,
            functions,
        } => commands::cmd_separate(input, measure, functions, &tol),
        Command::SpectralMeasure { input, matrix } => commands::cmd_spectral_measure(input, matrix, &tol),
        Command::Pushforward {
            input,
            measure,
            functions,
        } => commands::cmd_pushforward(input, measure, functions, &tol),
        Command::Campaign {
            seed,
            count,
            scenarios,
            out,
        } => {
            let scenarios = commands::parse_scenarios(scenarios.as_deref())?;
            commands::cmd_campaign(*seed, *count, &scenarios, out.as_deref(), &tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { pvm_algebra_cli::EXIT_SCHEMA } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{}", report.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.json).expect("serializable")),
            }
            ExitCode::from(report.exit as u8)
        }
        Err(e) => {
            eprintln!("pvmalg: {e}");
            if let Format::Json = cli.format {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit": e.exit_code() }));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
