use clap::Parser;

fn main() {
    let cli = lyh_lab::Cli::parse();
    std::process::exit(lyh_lab::run(&cli));
}
