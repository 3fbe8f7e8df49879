use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use addprolog::Limits;
use addprolog_service::{serve, ConnectionConfig, ServerConfig, DEFAULT_MAX_SESSIONS};
use clap::Parser;
use tracing_subscriber::EnvFilter;

/// Serve interactive addprolog sessions over WebSocket at `/ws`.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Resolution step limit for each session.
    #[arg(long, default_value_t = Limits::DEFAULT_STEPS)]
    limit_steps: u64,
    /// Unfinished sessions allowed per connection.
    #[arg(long, default_value_t = DEFAULT_MAX_SESSIONS)]
    max_sessions: usize,
    /// Serve files from this directory at `/`, e.g. the built web client.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();
    let listener = match tokio::net::TcpListener::bind((args.bind, args.port)).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {}:{}: {e}", args.bind, args.port);
            return ExitCode::FAILURE;
        }
    };
    let config = ServerConfig {
        connection: ConnectionConfig {
            limits: Limits::steps(args.limit_steps),
            max_sessions: args.max_sessions,
        },
        static_dir: args.static_dir,
    };
    match serve(listener, config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
