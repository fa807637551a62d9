use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thunderdome_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(o) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(o.render(cli.format).as_bytes());
        }
        Err(e) => eprintln!("error: {e:#}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
