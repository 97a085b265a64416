use clap::Parser;
use filtrun::cli::{run, Cli};

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    std::process::ExitCode::from(run(cli))
}
