use clap::Parser;

fn main() {
    let cli = aoa_lab::cli::Cli::parse();
    std::process::exit(aoa_lab::cli::run(cli));
}
