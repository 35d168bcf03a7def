use std::process::ExitCode;

fn main() -> ExitCode {
    match mtlab::cli::parse_args(std::env::args_os()) {
        Ok(config) => ExitCode::from(mtlab::cli::run(&config)),
        Err(e) => {
            let code = e.exit_code();
            match &e {
                mtlab::cli::CliError::Usage(c) => {
                    let _ = c.print();
                }
                other => eprintln!("mtlab: error: {other}"),
            }
            ExitCode::from(code)
        }
    }
}
