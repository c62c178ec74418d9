use clap::Parser;

use anaflow::cli::{run, Cli, RunConfig};

fn main() {
    let cfg = RunConfig::from(Cli::parse());
    let outcome = run(&cfg);
    match &outcome.error {
        Some(doc) => eprint!("{doc}"),
        None => {
            for p in &outcome.artifacts {
                println!("{}", p.display());
            }
        }
    }
    std::process::exit(outcome.exit_code);
}
