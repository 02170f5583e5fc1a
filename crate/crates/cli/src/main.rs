mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliError, FamilyArgs, Format, Mode, Route};

#[derive(Parser, Debug)]
#[command(name = "mvhermite", version, about = "Matrix-valued Hermite-type orthogonal polynomials: tables, identity checks and Toda flows")]
struct Cli {
    /// JSON config file; command-line flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write P₀..P_nmax with norms and recurrence coefficients
    Gen(GenArgs),
    /// Run verification suites
    Verify(VerifyArgs),
    /// Toda flow: closed form against RK4, or exact residuals
    Toda(TodaArgs),
    /// Squared norms from the closed form and from Gram–Schmidt
    Norms(NormsArgs),
    /// Connection coefficients between two values of ν
    Connection(ConnectionArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long, value_enum)]
    pub route: Option<Route>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output if omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Suite name; repeat for several. All suites if omitted
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub mmax: Option<usize>,
    #[arg(long)]
    pub degree_cap: Option<usize>,
    #[arg(long)]
    pub quad_tolerance: Option<f64>,
    /// Write the report as JSON to this file
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Perturb the weight inside the Pearson suite (negative control)
    #[arg(long, hide = true)]
    pub corrupt_weight: bool,
}

#[derive(Args, Debug)]
pub struct TodaArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub tend: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Integrate with RK4 and compare with the closed form (default)
    #[arg(long)]
    pub compare: bool,
    /// Check the lattice equations as exact polynomial identities in t
    #[arg(long)]
    pub exact: bool,
    /// Maximum allowed deviation from the closed form
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Coarse step used for the convergence-order estimate
    #[arg(long, default_value_t = 0.1)]
    pub order_h: f64,
    /// Trajectory CSV output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConnectionArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Target ν as "p/q"
    #[arg(long, allow_hyphen_values = true)]
    pub to: String,
    /// Degree n
    #[arg(long = "n")]
    pub degree: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("MVHERMITE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // A second initialisation in the same process is harmless to ignore.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let file = match config::load_file(&cli.config) {
        Ok(f) => f,
        Err(e) => return report(e),
    };
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a, &file),
        Command::Verify(a) => commands::verify(a, &file),
        Command::Toda(a) => commands::toda(a, &file),
        Command::Norms(a) => commands::norms(a, &file),
        Command::Connection(a) => commands::connection(a, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    match e {
        CliError::Invalid(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        CliError::Failed(msg) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}
