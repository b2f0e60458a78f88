use clap::Parser;
use redispatch_cli::{classify, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(classify(&err).exit_code());
    }
}
