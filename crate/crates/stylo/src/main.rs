mod artifact;
mod commands;

use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // usage problems are input errors
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err:#}");
        let code = err
            .downcast_ref::<stylometry::Error>()
            .map(|e| if e.is_convergence_failure() { 2 } else { 1 })
            .unwrap_or(1);
        std::process::exit(code);
    }
}
