use std::io::Write;
use std::process::ExitCode;

use elliptic_ainf::cli::{run, Defaults, TOL_ENV};

fn main() -> ExitCode {
    let env = std::env::var(TOL_ENV).ok();
    let defaults = match Defaults::from_env_value(env.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = run(std::env::args_os(), defaults);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
