use clap::Parser;

fn main() {
    let cli = expsum_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    std::process::exit(expsum_cli::dispatch(cli, &mut out));
}
