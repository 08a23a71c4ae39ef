use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(dotbus::cli::run())
}
