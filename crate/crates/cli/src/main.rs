use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    let code = fracdyn_cli::run(std::env::args_os(), &mut stdin.lock(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
