use clap::Parser;

fn main() {
    env_logger::init();
    std::process::exit(bergman_lab::cli::main_with(bergman_lab::cli::Cli::parse()));
}
