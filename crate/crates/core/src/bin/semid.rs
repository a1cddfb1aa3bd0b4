use clap::Parser;
use env_logger::Env;

use semid::cli::{exit_code, run, Cli};

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("SEMID_LOG", "warn")).init();
    if let Err(err) = run(Cli::parse()) {
        eprintln!("semid: {err}");
        std::process::exit(exit_code(&err));
    }
}
