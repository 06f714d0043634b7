use std::process::ExitCode;

fn main() -> ExitCode {
    avgop::cli::main()
}
