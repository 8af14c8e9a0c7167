use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(venice_cli::run(std::env::args_os()))
}
