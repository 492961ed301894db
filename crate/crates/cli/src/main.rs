use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use maxsing_cli::{run, Command, OutputMode, ScenarioRequest, EXIT_MALFORMED};

/// Runs one scenario and prints its report.
#[derive(Debug, Parser)]
#[command(name = "maxsing", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Scenario payload (JSON). Optional for `oracle`.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    mode: OutputMode,

    /// Seed for generated inputs.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MAXSING_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("MAXSING_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = configure_threads() {
        eprintln!("maxsing: {e}");
        return ExitCode::from(EXIT_MALFORMED as u8);
    }
    let text = match &args.input {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("maxsing: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_MALFORMED as u8);
            }
        },
        None if args.command == Command::Oracle => None,
        None => {
            eprintln!("maxsing: --in FILE is required for {}", args.command);
            return ExitCode::from(EXIT_MALFORMED as u8);
        }
    };
    let report = match text {
        Some(t) => match ScenarioRequest::from_text(args.command, &t) {
            Ok(mut req) => {
                req.output_mode = args.mode;
                req.seed = args.seed;
                run(&req)
            }
            Err(r) => r,
        },
        None => {
            let mut req = ScenarioRequest::new(args.command, serde_json::Value::Null);
            req.seed = args.seed;
            run(&req)
        }
    };
    let rendered = report.render(args.mode);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("maxsing: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_MALFORMED as u8);
            }
        }
        None => print!("{rendered}"),
    }
    if args.mode == OutputMode::Json {
        eprintln!("maxsing {}: {} in {:.3}s", args.command, report.status(), report.elapsed.as_secs_f64());
    }
    ExitCode::from(report.exit_code as u8)
}
