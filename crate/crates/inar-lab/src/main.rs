use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(inar_lab::cli::run(std::env::args()) as u8)
}
