use clap::error::ErrorKind;
use clap::Parser;
use loewner_cli::{error_json, run, Cli, EXIT_PARSE};
use loewner_core::Error;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            eprintln!("{}", error_json(&Error::Parse(e.to_string().trim_end().to_string())));
            std::process::exit(EXIT_PARSE);
        }
    };
    std::process::exit(run(&cli));
}
