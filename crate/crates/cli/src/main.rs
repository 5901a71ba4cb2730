use std::process::ExitCode;

use clap::Parser;
use excessvol_cli::{run, Args, RunConfig};

fn main() -> ExitCode {
    let args = Args::parse();
    match RunConfig::from_args(&args).and_then(|config| run(&config)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
