use clap::{Parser, Subcommand};
use cli::{CliError, Loaded};
use std::path::PathBuf;
use std::process::ExitCode;

/// Constraint analysis of time-dependent Lagrangians on the first jet bundle.
#[derive(Parser)]
#[command(name = "jetflow", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Lagrangian, Hamiltonian and Euler-Lagrange towers and report.
    Analyze {
        file: PathBuf,
        /// Write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the text digest.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate {F, G} and the Dirac bracket {F, G}_D on the final level.
    Bracket {
        file: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Integrate the Euler-Lagrange field with RK4 and emit CSV.
    Integrate {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("JETFLOW_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|_| CliError::Input(format!("JETFLOW_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load(file: &PathBuf) -> Result<Loaded, CliError> {
    cli::load(file)
}

fn execute(command: Command) -> Result<i32, CliError> {
    configure_threads()?;
    match command {
        Command::Analyze { file, out, json } => {
            let loaded = load(&file)?;
            let analysis = cli::analyze(&loaded);
            let text = analysis.report.to_json();
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            if json {
                print!("{text}");
            } else {
                print!("{}", analysis.report.to_text());
            }
            Ok(analysis.exit_code)
        }
        Command::Bracket { file, f, g } => {
            let loaded = load(&file)?;
            let rep = cli::bracket(&loaded, &f, &g)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&rep).expect("bracket report serializes")
            );
            Ok(0)
        }
        Command::Integrate {
            file,
            horizon,
            step,
            out,
        } => {
            let loaded = load(&file)?;
            let run = cli::integrate(&loaded, horizon, step)?;
            match out {
                Some(path) => std::fs::write(path, &run.csv)?,
                None => print!("{}", run.csv),
            }
            eprint!("{}", run.summary);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("jetflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
