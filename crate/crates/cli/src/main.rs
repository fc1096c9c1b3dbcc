use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypolab::{run_file, sweep_file, validate_file, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "hypolab", version, about = "Hypocoercivity experiments from flat JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run the cartesian product of the `sweep.*` lists.
    Sweep {
        config: PathBuf,
        /// Worker threads (default: available cores, at most 8).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a config without computing anything.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => match run_file(&config) {
            Ok((rec, _)) => {
                for (k, v) in &rec.headline {
                    match v {
                        Some(x) => println!("{k} = {x}"),
                        None => println!("{k} = n/a"),
                    }
                }
                for (k, v) in &rec.verdicts {
                    println!("{k}: {}", if *v { "pass" } else { "FAIL" });
                }
                println!("record: {}", rec.files.last().map(String::as_str).unwrap_or(""));
                rec.exit_code
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Sweep { config, workers } => match sweep_file(&config, workers) {
            Ok(rec) => {
                for r in &rec.rows {
                    let vals: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
                    match &r.error {
                        Some(e) => println!("[{}] {} error: {e}", r.index, vals.join(", ")),
                        None => println!("[{}] {} {}", r.index, vals.join(", "), r.status),
                    }
                }
                if let Some(e) = rec.loglog_exponent {
                    println!("log-log exponent = {e}");
                }
                println!("aggregate: {}", rec.aggregate.display());
                rec.exit_code
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Validate { config } => match validate_file(&config) {
            Ok(points) => {
                println!("ok: {} run(s), mode {}", points.len(), points[0].plan.mode().name());
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
    };
    ExitCode::from(code as u8)
}
