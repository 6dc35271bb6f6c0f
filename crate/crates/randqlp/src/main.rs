use std::process::ExitCode;

fn main() -> ExitCode {
    randqlp::cli::main_with_args(std::env::args_os())
}
