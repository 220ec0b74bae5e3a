use clap::Parser;

fn main() {
    let config = schatten_cli::Config::parse();
    if let Err(e) = schatten_cli::run(&config) {
        eprintln!("{}", e.record());
        std::process::exit(e.exit_code());
    }
}
