use std::process::ExitCode;

mod commands;
mod manifest;

fn main() -> ExitCode {
    let cli = commands::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
