//! HTTP/JSON API over a directory of `.scha.json` analyses.
//!
//! Documents are stored canonically and versioned by the SHA-256 of their
//! bytes. Updates must send the current value as `If-Match`; creating a new
//! id needs no precondition. Derived views (clusters, prolongations, score
//! graph, rendering) are recomputed from the stored document on each request.

mod api;
pub mod store;

use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use thiserror::Error;
use tower_http::cors::CorsLayer;

pub use api::ApiError;
pub use store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("root {0} is not a directory")]
    Root(PathBuf),
    #[error("invalid CORS origin {0:?}")]
    Origin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub root: PathBuf,
    pub port: u16,
    /// Origin allowed to call the API from a browser.
    pub cors: Option<String>,
}

pub fn router(store: Store) -> Router {
    Router::new()
        .route("/api/analyses", get(api::list))
        .route("/api/analyses/{id}", get(api::get_document).put(api::put_document))
        .route("/api/analyses/{id}/validate", post(api::validate_document))
        .route("/api/analyses/{id}/derived/{kind}", get(api::derived))
        .route("/api/corpus/stats", get(api::corpus_stats))
        .with_state(Arc::new(store))
}

pub fn cors_layer(origin: &str) -> Result<CorsLayer, ServiceError> {
    let origin = HeaderValue::from_str(origin).map_err(|_| ServiceError::Origin(origin.to_string()))?;
    Ok(CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::PUT, Method::POST])
        .allow_headers([header::CONTENT_TYPE, header::IF_MATCH])
        .expose_headers([header::ETAG]))
}

/// Serves on 127.0.0.1 until the process is stopped.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    if !config.root.is_dir() {
        return Err(ServiceError::Root(config.root));
    }
    let mut app = router(Store::new(&config.root));
    if let Some(origin) = &config.cors {
        app = app.layer(cors_layer(origin)?);
    }
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} on http://{}", config.root.display(), listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
