//! HTTP/JSON service over `brnet-core`: synchronous or queued simulations,
//! δ-sweeps as jobs with streamed partial rows, spectra and equilibrium reports.

mod api;
mod error;
pub mod jobs;
pub mod trace;

use std::sync::Arc;

use axum::http::HeaderValue;
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::{ApiError, ApiResult};
pub use jobs::{JobHandle, JobKind, JobStatus, JobTable};

/// Default vertex cap for any request.
pub const DEFAULT_N_CAP: usize = 2000;
/// Default cap on `(δ, trial)` cells per sweep request.
pub const DEFAULT_SWEEP_BUDGET: u64 = 250_000;
/// Simulations whose worst case `n · max_rounds` stays below this run inline.
pub const DEFAULT_SYNC_STEP_LIMIT: u64 = 20_000_000;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub n_cap: usize,
    pub sweep_budget: u64,
    pub sync_step_limit: u64,
    /// Worker threads; 0 means one per CPU.
    pub workers: usize,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            n_cap: DEFAULT_N_CAP,
            sweep_budget: DEFAULT_SWEEP_BUDGET,
            sync_step_limit: DEFAULT_SYNC_STEP_LIMIT,
            workers: 0,
            cors_origin: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub config: Arc<ServerConfig>,
    pub jobs: JobTable,
    pool: Arc<rayon::ThreadPool>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("brnet-worker-{i}"))
            .build()
            .expect("worker pool");
        AppState {
            config: Arc::new(config),
            jobs: JobTable::default(),
            pool: Arc::new(pool),
        }
    }

    /// Runs `f` on the worker pool and waits for it without blocking the runtime.
    pub(crate) async fn compute<T, F>(&self, f: F) -> T
    where
        T: Send + 'static,
        F: FnOnce() -> T + Send + 'static,
    {
        let (tx, rx) = tokio::sync::oneshot::channel();
        self.pool.spawn(move || {
            let _ = tx.send(f());
        });
        rx.await.expect("worker dropped a result")
    }

    /// Fire-and-forget work on the pool.
    pub(crate) fn spawn(&self, f: impl FnOnce() + Send + 'static) {
        self.pool.spawn(f);
    }
}

fn cors(origin: Option<&str>) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => layer.allow_origin(AllowOrigin::exact(o)),
        None => layer.allow_origin(Any),
    }
}

pub fn router(config: ServerConfig) -> Router {
    router_with_state(AppState::new(config))
}

pub fn router_with_state(state: AppState) -> Router {
    let cors = cors(state.config.cors_origin.as_deref());
    Router::new()
        .route("/api/health", get(|| async { "ok" }))
        .route("/api/presets", get(api::presets))
        .route("/api/simulate", post(api::simulate))
        .route("/api/sweep", post(api::sweep))
        .route("/api/jobs/{id}", get(api::job_status))
        .route("/api/jobs/{id}/result", get(api::job_result))
        .route("/api/jobs/{id}/cancel", post(api::job_cancel))
        .route("/api/graph", get(api::graph))
        .route("/api/equilibria", get(api::equilibria))
        .layer(cors)
        .with_state(state)
}
