use clap::Parser;

fn main() {
    let cli = voltlab_cli::Cli::parse();
    if let Err(error) = voltlab_cli::run(cli) {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
