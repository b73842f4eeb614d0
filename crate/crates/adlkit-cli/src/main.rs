use std::process::ExitCode;

fn main() -> ExitCode {
    adlkit_cli::main_entry()
}
