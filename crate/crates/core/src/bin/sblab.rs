use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinboson_lab::experiments::{self, ExperimentConfig, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "sblab", version, about = "Run spin-boson experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts and manifest.
    Run {
        config: PathBuf,
        /// Overrides the config's output_dir (and $SBLAB_OUTPUT_DIR).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List the available experiments.
    List,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", experiments::list_experiments());
            0
        }
        Command::Validate { config } => match ExperimentConfig::load(&config).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                println!("ok: {} ({})", config.display(), c.experiment.name());
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Run { config, output_dir } => {
            let output_dir = output_dir.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
            let result = ExperimentConfig::load(&config).and_then(|c| experiments::run_config(&c, output_dir.as_deref()));
            match &result {
                Ok(run) => {
                    for line in &run.summary {
                        println!("{line}");
                    }
                    println!(
                        "wrote {} files to {}",
                        run.manifest.files.len() + 1,
                        run.output_dir.display()
                    );
                }
                Err(e) => eprintln!("error: {e}"),
            }
            experiments::exit_code(&result)
        }
    };
    ExitCode::from(code as u8)
}
