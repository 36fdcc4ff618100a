use clap::Parser;

fn main() {
    let cli = luxen::cli::Cli::parse();
    std::process::exit(luxen::cli::run(&cli));
}
