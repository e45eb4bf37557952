use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(agenda_cli::run(std::env::args_os()))
}
