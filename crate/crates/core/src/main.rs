use std::process::ExitCode;

fn main() -> ExitCode {
    fracspec::cli::run(std::env::args_os())
}
