use std::process::ExitCode;

fn main() -> ExitCode {
    zograd::cli::main()
}
