use clap::Parser;

fn main() {
    let cli = charpoly_cli::Cli::parse();
    match charpoly_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("charpoly: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
