use clap::Parser;

fn main() {
    let cli = tripod::cli::Cli::parse();
    std::process::exit(tripod::cli::main_with(cli));
}
