use std::io::Write;

fn main() {
    let exit = rmt_lab::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(exit.stdout.as_bytes());
    let _ = std::io::stderr().write_all(exit.stderr.as_bytes());
    std::process::exit(exit.code);
}
