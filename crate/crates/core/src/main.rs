use std::process::ExitCode;

fn main() -> ExitCode {
    potb::cli::run(std::env::args_os())
}
