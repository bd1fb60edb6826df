use std::process::ExitCode;

use clap::Parser;
use dirac_qca_cli::{execute, Args, Severity};

fn main() -> ExitCode {
    let args = Args::parse();
    let result = args.resolve().and_then(|config| {
        // warnings are printed up front; errors come back inside CliError::Invalid
        for d in config
            .validate()
            .iter()
            .filter(|d| d.severity == Severity::Warning)
        {
            eprintln!("{d}");
        }
        execute(&config)
    });
    match result {
        Ok(report) => {
            for path in &report.outputs {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
