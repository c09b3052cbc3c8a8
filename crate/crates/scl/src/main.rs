use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(scl::cli::main_entry())
}
