use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use asym_cli::{parse_config, run, schema, write_outputs, CliError, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "asymtool", version, about = "Translation-asymmetry experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides `output_dir` (default `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config, printing it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the JSON schema of config files.
    Schema,
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match cli.command {
        Command::Schema => {
            emit(&serde_json::to_string_pretty(&schema::config_schema()).expect("schema encodes"));
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match parse_config(&config) {
            Ok(cfg) => {
                emit(&serde_json::to_string_pretty(&cfg).expect("config encodes"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Run { config, seed, out } => {
            let mut cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = Some(o);
            }
            let report = match run(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            let (json, csv) = match write_outputs(&report, &dir) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            for a in &report.assertions {
                emit(&format!(
                    "{} {} (witness {:e})",
                    if a.pass { "PASS" } else { "FAIL" },
                    a.name,
                    a.witness
                ));
            }
            emit(&format!("report: {}\nrecords: {}", json.display(), csv.display()));
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERTION as u8)
            }
        }
    }
}
