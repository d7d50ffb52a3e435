//! HTTP/JSON front end for the social API.
//!
//! Every request is translated into an [`ApiRequest`] and handed to the shared
//! [`ApiServer`](sleeper_core::api::ApiServer), so the wire behaviour is exactly
//! the in-process dispatch behaviour.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use serde_json::{json, Value};
use sleeper_core::agent::SharedServer;
use sleeper_core::api::{ApiRequest, Method};
use sleeper_core::social::Millis;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

/// How the store clock moves while serving.
#[derive(Debug, Clone, Copy)]
pub enum Clock {
    /// Someone else (the harness) advances the store.
    Manual,
    /// Before each request the store is advanced to `offset` plus the wall
    /// time elapsed since `origin`.
    Wall { origin: Instant, offset: Millis },
}

impl Clock {
    pub fn wall_from(offset: Millis) -> Self {
        Clock::Wall {
            origin: Instant::now(),
            offset,
        }
    }

    fn now(&self) -> Option<Millis> {
        match self {
            Clock::Manual => None,
            Clock::Wall { origin, offset } => Some(offset + origin.elapsed().as_millis() as Millis),
        }
    }
}

#[derive(Clone)]
struct AppState {
    server: SharedServer,
    clock: Clock,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn router(server: SharedServer, clock: Clock) -> Router {
    Router::new()
        .fallback(handle)
        .with_state(AppState { server, clock })
        .layer(CorsLayer::permissive())
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })
}

/// Serves until `shutdown` resolves.
pub async fn serve<F>(listener: TcpListener, app: Router, shutdown: F) -> io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    let (scheme, token) = value.split_once(' ')?;
    scheme.eq_ignore_ascii_case("bearer").then(|| token.trim().to_string())
}

async fn handle(
    State(state): State<AppState>,
    method: axum::http::Method,
    uri: Uri,
    Query(query): Query<Vec<(String, String)>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let method = match method {
        axum::http::Method::GET => Method::Get,
        axum::http::Method::POST => Method::Post,
        _ => return error(StatusCode::NOT_FOUND, "not found"),
    };
    let body = if body.iter().all(u8::is_ascii_whitespace) {
        None
    } else {
        match serde_json::from_slice::<Value>(&body) {
            Ok(v) => Some(v),
            Err(_) => return error(StatusCode::BAD_REQUEST, "request body is not JSON"),
        }
    };
    let req = ApiRequest {
        method,
        path: uri.path().to_string(),
        query,
        body,
        bearer: bearer(&headers),
    };

    let resp = {
        let Ok(mut server) = state.server.lock() else {
            return error(StatusCode::INTERNAL_SERVER_ERROR, "server state poisoned");
        };
        if let Some(now) = state.clock.now() {
            let at = now.max(server.store().now());
            // cannot fail: `at` is never behind the store
            let _ = server.store_mut().advance_to(at);
        }
        server.dispatch(&req)
    };
    tracing::debug!(path = %req.path, status = resp.status, "api request");
    let status = StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(resp.body)).into_response()
}
