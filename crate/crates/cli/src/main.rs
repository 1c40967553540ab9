use clap::Parser;
use std::process::ExitCode;
use wchernoff_cli::{run, validate, Cli, CliError, CommandConfig, Output, Report};

fn execute(cli: Cli) -> Result<(), CliError> {
    let (check_only, kind, options) = cli.command.split();
    let config = CommandConfig::from_options(kind, &options)?;
    let output = if check_only {
        let diagnostics = validate(&config);
        Output::Json(Box::new(Report::new(
            &config,
            serde_json::json!({ "valid": diagnostics.is_empty() }),
            diagnostics,
        )))
    } else {
        run(&config)?
    };
    let text = output.render();
    match &options.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
