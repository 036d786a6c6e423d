use std::process::ExitCode;

use clap::Parser;
use isce2d::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("not every solve converged");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
