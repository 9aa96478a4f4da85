use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "zeeman-xpm",
    version,
    about = "Cross-coupled EIT in Zeeman-split F=1 atoms"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Built-in parameter set, used when no scenario file is given.
    #[arg(long, global = true, default_value = "rb87-d1")]
    pub preset: String,
    /// Scenario file (`key = value` lines, `#` comments).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for sweeps and validation; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state polarizabilities and the regime report.
    Steady {
        /// Thermally average the numeric result, e.g. `T=10` or `T=250uK`.
        #[arg(long, value_name = "T=<temperature>")]
        doppler: Option<String>,
    },
    /// One response row per sample of the scenario's sweep variable.
    Sweep,
    /// Propagate both pulses through the medium.
    Propagate,
    /// Transmission of E_a with and without E_b in the cross-absorption scheme.
    Switch,
    /// Run the acceptance criteria.
    Validate {
        /// Restrict to these criterion ids.
        #[arg(long = "criterion", value_name = "ID")]
        criteria: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Steady { doppler } => commands::steady(&cli.global, doppler.as_deref()),
        Command::Sweep => commands::sweep(&cli.global),
        Command::Propagate => commands::propagate(&cli.global),
        Command::Switch => commands::switch(&cli.global),
        Command::Validate { criteria } => commands::validate(&cli.global, criteria),
    });
    match outcome {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::ValidationFailed) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
