use clap::Parser;

fn main() {
    let cli = multcomp::cli::Cli::parse();
    match multcomp::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(multcomp::cli::EXIT_USAGE);
        }
    }
}
