use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cca_cli::run(std::env::args_os()))
}
