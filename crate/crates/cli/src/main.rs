use std::process::ExitCode;

fn main() -> ExitCode {
    let code = stochmls_cli::run(std::env::args_os(), std::env::vars());
    ExitCode::from(code as u8)
}
