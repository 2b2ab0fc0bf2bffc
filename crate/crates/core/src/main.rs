use std::io::{self, Write};
use std::process::ExitCode;

use agentloop::cli::{parse_args, run_scenario, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e @ CliError::Info(_)) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = run_scenario(&config, &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(code as u8)
}
