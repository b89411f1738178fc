use clap::Parser;

fn main() {
    let cli = pxcnn::cli::Cli::parse();
    if let Err(error) = pxcnn::commands::dispatch(&cli.command) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
