use std::process::ExitCode;

fn main() -> ExitCode {
    match kappanet::cli::run() {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
