use std::io::Write;

fn main() {
    let inv = kpart_cli::run_from(std::env::args_os());
    let _ = std::io::stdout().write_all(inv.stdout.as_bytes());
    let _ = std::io::stderr().write_all(inv.stderr.as_bytes());
    std::process::exit(inv.exit_code);
}
