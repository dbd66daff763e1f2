use clap::Parser;

use randpoly::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(Some(path)) => eprintln!("wrote {}", path.display()),
        Ok(None) => {}
        Err(e) => {
            eprintln!("randpoly: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
