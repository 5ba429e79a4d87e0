use std::net::SocketAddr;

use brnet_server::{router, ServerConfig, DEFAULT_N_CAP, DEFAULT_SWEEP_BUDGET, DEFAULT_SYNC_STEP_LIMIT};
use clap::Parser;

/// HTTP/JSON service for best-response dynamics on networks.
#[derive(Debug, Parser)]
#[command(name = "brnet-server", version)]
struct Args {
    #[arg(long, env = "BRNET_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "BRNET_PORT", default_value_t = 8080)]
    port: u16,
    /// Worker threads for simulations and sweeps; 0 uses every CPU.
    #[arg(long, env = "BRNET_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Largest graph accepted by any endpoint.
    #[arg(long, env = "BRNET_N_CAP", default_value_t = DEFAULT_N_CAP)]
    n_cap: usize,
    /// Largest number of (δ, trial) runs in one sweep request.
    #[arg(long, env = "BRNET_SWEEP_BUDGET", default_value_t = DEFAULT_SWEEP_BUDGET)]
    sweep_budget: u64,
    /// Simulations with n · max_rounds above this become jobs.
    #[arg(long, env = "BRNET_SYNC_STEP_LIMIT", default_value_t = DEFAULT_SYNC_STEP_LIMIT)]
    sync_step_limit: u64,
    /// Origin allowed by CORS; any origin when omitted.
    #[arg(long, env = "BRNET_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let config = ServerConfig {
        n_cap: args.n_cap,
        sweep_budget: args.sweep_budget,
        sync_step_limit: args.sync_step_limit,
        workers: args.workers,
        cors_origin: args.cors_origin,
    };
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("brnet-server listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}
