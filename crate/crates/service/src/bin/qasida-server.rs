use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use qasida_core::meterdb::PatternDb;
use qasida_core::scansion::{ScanOptions, DEFAULT_MIN_COVERAGE};
use qasida_service::{router, AppState};
use tracing_subscriber::EnvFilter;

#[derive(Parser, Debug)]
#[command(name = "qasida-server", version, about = "Serve the prosody engine over HTTP/JSON")]
struct Args {
    /// Meter database; the built-in seed is used when absent.
    #[arg(long, env = "QASIDA_DB")]
    db: Option<PathBuf>,
    #[arg(long, env = "QASIDA_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "QASIDA_HOST", default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Default diacritic coverage threshold for scansion.
    #[arg(long, env = "QASIDA_MIN_COVERAGE", default_value_t = DEFAULT_MIN_COVERAGE)]
    min_coverage: f64,
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    if !(0.0..=1.0).contains(&args.min_coverage) {
        eprintln!("error: --min-coverage must be within [0, 1]");
        std::process::exit(1);
    }
    let db = match &args.db {
        Some(path) => match PatternDb::load(path) {
            Ok(db) => db,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                std::process::exit(2);
            }
        },
        None => PatternDb::seed(),
    };
    let opts = ScanOptions { min_coverage: args.min_coverage, ..Default::default() };
    let addr = SocketAddr::new(args.host, args.port);
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: bind {addr}: {e}");
            std::process::exit(3);
        }
    };
    tracing::info!(%addr, checksum = db.checksum(), "listening");
    let app = router(AppState::new(db, opts));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .expect("server error");
}
