use std::process::ExitCode;

fn main() -> ExitCode {
    timegov::cli::main()
}
