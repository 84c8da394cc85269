use std::process::ExitCode;

use rwrs_cli::config::{parse_config, SEED_ENV};
use rwrs_cli::CliError;

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match parse_config(std::env::args_os(), env_seed.as_deref()) {
        Ok(cfg) => cfg,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("rwrs: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    ExitCode::from(rwrs_cli::run(&cfg) as u8)
}
