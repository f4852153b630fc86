use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcl_expcli::{execute, FamilyName, RunRequest};

#[derive(Parser)]
#[command(name = "gcl-sim", version, about = "Driven dissipative Kerr oscillator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (replaces output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Run a single family: CL, gCL or lindblad.
        #[arg(long)]
        family: Option<FamilyName>,
        /// `key.path=value`, applied after the config file; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Command::Run { config, out, threads, family, overrides } = cli.command;
    let req = RunRequest { config, out, threads, family, overrides };
    match execute(&req) {
        Ok(files) => {
            println!("{}", files.csv.display());
            println!("{}", files.json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
