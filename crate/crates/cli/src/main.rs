use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use flg_lab::commands::run;
use flg_lab::config::{Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig::from(cli.command);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let code = run(&cfg, &mut out, &mut stderr.lock());
    let _ = out.flush();
    ExitCode::from(code as u8)
}
