use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let req = match wres_cli::parse_request(&args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e:#}");
            return ExitCode::from(wres_cli::exit_code(&e) as u8);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match wres_cli::run(&req, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(wres_cli::exit_code(&e) as u8)
        }
    }
}
