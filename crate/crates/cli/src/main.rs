use clap::Parser;
use spacetime_cli::{exit_code, execute, ExperimentSpec};
use spacetime_core::Error as CoreError;

fn main() {
    let spec = ExperimentSpec::parse();
    match execute(&spec) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            if let Some(CoreError::CapExceeded { cap }) = e.downcast_ref::<CoreError>() {
                eprintln!("error: {e:#} (raise --cap above {cap} to continue)");
            } else {
                eprintln!("error: {e:#}");
            }
            std::process::exit(exit_code(&e));
        }
    }
}
