use clap::Parser;

fn main() {
    let cli = bolab::Cli::parse();
    if let Err(e) = bolab::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
