use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ann_service::cli::{run, Cli, CORPUS_DIR_ENV};

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let env_corpus = std::env::var_os(CORPUS_DIR_ENV).map(PathBuf::from);
    let mut stdout = std::io::stdout().lock();
    match run(cli, env_corpus.as_deref(), &mut stdout) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
