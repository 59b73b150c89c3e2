use std::io;
use std::process::ExitCode;

use groupsize::cli;

fn main() -> ExitCode {
    let mut stderr = io::stderr();
    if let Err(e) = cli::configure_threads() {
        eprintln!("groupsize: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let code = cli::main_with_args(std::env::args_os(), &mut io::stdout().lock(), &mut stderr);
    ExitCode::from(code as u8)
}
