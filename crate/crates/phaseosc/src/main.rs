use clap::Parser;
use phaseosc::cli;

fn main() {
    let parsed = cli::Cli::try_parse();
    let code = match parsed {
        Ok(args) => cli::run(args),
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                cli::EXIT_CONFIG
            } else {
                print!("{e}");
                cli::EXIT_OK
            }
        }
    };
    std::process::exit(code);
}
