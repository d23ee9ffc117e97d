use clap::Parser;
use cpi::cli::{expand_args, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = expand_args(std::env::args_os().collect()).and_then(|args| run(Cli::parse_from(args)));
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
