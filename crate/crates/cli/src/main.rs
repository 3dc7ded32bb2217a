use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use statvar_core::{catalog, variation};

#[derive(Debug, Parser)]
#[command(name = "statvar", version)]
#[command(about = "checks for biharmonic maps between statistical manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the checks of a scenario file. Exits 1 if any check fails.
    Run {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// List catalog entries with their default parameters.
    List,
    /// Roots of μ(μ−1) + pμ + q = 0.
    #[command(allow_negative_numbers = true)]
    Roots { p: f64, q: f64 },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, format } => {
            let report = match statvar_cli::run_file(&config) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let text = match format {
                Format::Human => report.to_human(),
                Format::Machine => report.to_machine(),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::List => {
            for e in catalog::entries() {
                let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<10} {:<26} {:<40} {}", e.kind.as_str(), e.name, params.join(" "), e.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Roots { p, q } => match variation::characteristic_roots(p, q) {
            Ok((a, b)) => {
                println!("{a:.17e}\n{b:.17e}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
