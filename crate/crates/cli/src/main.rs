use clap::Parser;
use lyapmax_cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("lyapmax: {e}");
    }
    std::process::exit(exit_code(&result));
}
