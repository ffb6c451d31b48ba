use std::process::ExitCode;

use clap::Parser;
use qkr_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(summary) => {
            let m = &summary.manifest;
            println!(
                "{}: {} files in {} ({:.2} s, {} threads)",
                m.scenario,
                m.outputs.len() + 1,
                summary.out_dir.display(),
                m.wall_time_s,
                m.threads
            );
            for (name, value) in &m.metrics {
                println!("  {name} = {value:.6}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
