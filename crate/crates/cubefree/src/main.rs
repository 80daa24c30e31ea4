use clap::Parser;

fn main() {
    let cli = cubefree::cli::Cli::parse();
    if let Err(e) = cubefree::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
