use std::process::ExitCode;

use genquad_cli::{run_command, Invocation};

fn main() -> ExitCode {
    match run_command(std::env::args_os()) {
        Invocation::Help { text, exit_code } => {
            if exit_code == 0 {
                print!("{text}");
            } else {
                eprint!("{text}");
            }
            ExitCode::from(exit_code as u8)
        }
        Invocation::Report(report) => {
            println!("{}", report.to_json());
            eprintln!("{}", report.summary);
            ExitCode::from(report.exit_code as u8)
        }
    }
}
