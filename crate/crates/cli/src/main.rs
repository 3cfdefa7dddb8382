use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tatetrace::commands::{run, Cli, INPUT_ERROR};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR as u8 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    // Write errors (a closed pipe, say) are ignored; the exit code still
    // carries the verdict.
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report.json).expect("reports serialize"));
            } else {
                let _ = writeln!(out, "{}", report.text);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::json!({"error": e.to_string()}));
            }
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR as u8)
        }
    }
}
