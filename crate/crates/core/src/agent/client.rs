use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use serde::de::DeserializeOwned;

use crate::api::{ApiRequest, ApiResponse, ApiServer, FollowView, NotificationView, StatusView};

pub type SharedServer = Arc<Mutex<ApiServer>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApiFailure {
    #[error("server returned {status}: {message}")]
    Status { status: u16, message: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("undecodable response: {0}")]
    Decode(String),
}

/// A session on the social server. Implementors only provide `send`; the
/// typed calls build requests for the five public endpoints.
#[async_trait]
pub trait ApiClient: Send + Sync {
    async fn send(&self, req: ApiRequest) -> Result<ApiResponse, ApiFailure>;

    async fn home_timeline(&self, limit: usize) -> Result<Vec<StatusView>, ApiFailure> {
        let req = ApiRequest::get("/api/v1/timelines/home").query("limit", limit);
        decode(self.send(req).await?)
    }

    async fn notifications(&self, unread_only: bool) -> Result<Vec<NotificationView>, ApiFailure> {
        let req = ApiRequest::get("/api/v1/notifications").query("unread", unread_only);
        decode(self.send(req).await?)
    }

    async fn post_status(
        &self,
        body: &str,
        in_reply_to: Option<&str>,
    ) -> Result<StatusView, ApiFailure> {
        let req = ApiRequest::post("/api/v1/statuses")
            .json(serde_json::json!({ "status": body, "in_reply_to_id": in_reply_to }));
        decode(self.send(req).await?)
    }

    async fn favourite(&self, status_id: &str) -> Result<StatusView, ApiFailure> {
        let req = ApiRequest::post(format!("/api/v1/statuses/{status_id}/favourite"));
        decode(self.send(req).await?)
    }

    async fn follow(&self, account_id: &str) -> Result<FollowView, ApiFailure> {
        let req = ApiRequest::post(format!("/api/v1/accounts/{account_id}/follow"));
        decode(self.send(req).await?)
    }
}

pub fn decode<T: DeserializeOwned>(resp: ApiResponse) -> Result<T, ApiFailure> {
    if !resp.is_success() {
        let message = resp
            .body
            .get("error")
            .and_then(|v| v.as_str())
            .unwrap_or_default()
            .to_string();
        return Err(ApiFailure::Status {
            status: resp.status,
            message,
        });
    }
    serde_json::from_value(resp.body).map_err(|e| ApiFailure::Decode(e.to_string()))
}

/// In-process session that dispatches straight into a shared [`ApiServer`].
#[derive(Clone)]
pub struct LocalClient {
    server: SharedServer,
    token: String,
}

impl LocalClient {
    pub fn new(server: SharedServer, token: impl Into<String>) -> Self {
        LocalClient {
            server,
            token: token.into(),
        }
    }
}

#[async_trait]
impl ApiClient for LocalClient {
    async fn send(&self, req: ApiRequest) -> Result<ApiResponse, ApiFailure> {
        let req = req.bearer(self.token.clone());
        let mut server = self
            .server
            .lock()
            .map_err(|_| ApiFailure::Transport("server lock poisoned".into()))?;
        Ok(server.dispatch(&req))
    }
}
