use clap::Parser;

fn main() {
    let cli = torus_patterns::cli::Cli::parse();
    std::process::exit(torus_patterns::cli::run(&cli));
}
