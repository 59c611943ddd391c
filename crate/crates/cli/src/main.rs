use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let style = slin::Style::from_env();
    let code = slin::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock(), style);
    ExitCode::from(code)
}
