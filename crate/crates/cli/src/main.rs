use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isogeo_cli::commands::{self, CliError, Format};
use isogeo_cli::config::{load_scene, Scalar};

#[derive(Parser)]
#[command(name = "isogeo", version, about = "Hypersurface families through a curve in 4D Galilean space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Frenet apparatus of the scene curve.
    Frenet {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated s values; constant expressions such as `pi/4` are allowed.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the type-specific checker and the generic isogeodesic validation.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the projected surface as a mesh.
    Project {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "obj")]
        format: Format,
    },
    /// Write raw 4D surface points over the (s, u, v) lattice as CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Frenet { config, s, json } => {
            let scene = load_scene(&config)?;
            let s: Vec<Scalar> = s.into_iter().map(Scalar::Expr).collect();
            commands::frenet(&scene, &s, json, out)?;
        }
        Command::Validate { config, json } => {
            commands::validate(&load_scene(&config)?, json, out)?;
        }
        Command::Project { config, out: path, format } => {
            commands::project(&load_scene(&config)?, &path, format, out)?;
        }
        Command::Sample { config, out: path } => {
            commands::sample(&load_scene(&config)?, &path, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; 2 is reserved for degenerate frames
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(commands::EXIT_CONFIG as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("isogeo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
