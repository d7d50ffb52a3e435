//! Mastodon-compatible request layer over the social store.
//!
//! [`ApiServer::dispatch`] is transport independent: the HTTP server, the
//! in-process agent client and the tests all go through it.
//!
//! | method | path                             | result                |
//! |--------|----------------------------------|-----------------------|
//! | POST   | /api/v1/statuses                 | `StatusView`          |
//! | GET    | /api/v1/timelines/home?limit=N   | `[StatusView]`        |
//! | GET    | /api/v1/notifications?unread=B   | `[NotificationView]`  |
//! | POST   | /api/v1/statuses/:id/favourite   | `StatusView`          |
//! | POST   | /api/v1/accounts/:id/follow      | `FollowView`          |

mod views;

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::social::{AccountId, AccountKind, PostId, Store, StoreError};

pub use views::{AccountView, FollowView, MentionView, NotificationView, StatusView};

pub const DEFAULT_TIMELINE_LIMIT: usize = 30;
pub const MAX_TIMELINE_LIMIT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiRequest {
    pub method: Method,
    pub path: String,
    pub query: Vec<(String, String)>,
    pub body: Option<Value>,
    pub bearer: Option<String>,
}

impl ApiRequest {
    pub fn new(method: Method, path: impl Into<String>) -> Self {
        ApiRequest {
            method,
            path: path.into(),
            query: Vec::new(),
            body: None,
            bearer: None,
        }
    }

    pub fn get(path: impl Into<String>) -> Self {
        Self::new(Method::Get, path)
    }

    pub fn post(path: impl Into<String>) -> Self {
        Self::new(Method::Post, path)
    }

    pub fn query(mut self, key: &str, value: impl ToString) -> Self {
        self.query.push((key.to_string(), value.to_string()));
        self
    }

    pub fn json(mut self, body: Value) -> Self {
        self.body = Some(body);
        self
    }

    pub fn bearer(mut self, token: impl Into<String>) -> Self {
        self.bearer = Some(token.into());
        self
    }

    fn query_param(&self, key: &str) -> Option<&str> {
        self.query
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

impl ApiResponse {
    fn ok(body: Value) -> Self {
        ApiResponse { status: 200, body }
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApiError {
    #[error("unauthorized")]
    Unauthorized,
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    BadRequest(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::Unauthorized => 401,
            ApiError::NotFound(_) => 404,
            ApiError::Unprocessable(_) => 422,
            ApiError::BadRequest(_) => 400,
        }
    }

    fn into_response(self) -> ApiResponse {
        ApiResponse {
            status: self.status(),
            body: json!({ "error": self.to_string() }),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        use StoreError::*;
        match e {
            UnknownAuthor(_) | UnknownParent(_) | UnknownAccount(_) | UnknownPost(_)
            | UnknownNotification(_) => ApiError::NotFound(e.to_string()),
            BodyEmpty | BodyTooLong { .. } | SelfFollow => {
                ApiError::Unprocessable(e.to_string())
            }
            InvalidHandle(_) | DuplicateHandle(_) | ClockRewind { .. } => {
                ApiError::BadRequest(e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegisterError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("session token must be non-empty")]
    EmptyToken,
    #[error("session token already issued")]
    DuplicateToken,
}

/// Bearer tokens issued by the operator. Insert-only.
#[derive(Debug, Clone, Default)]
pub struct SessionTable {
    tokens: HashMap<String, AccountId>,
}

impl SessionTable {
    pub fn issue(&mut self, token: &str, account: AccountId) -> Result<(), RegisterError> {
        if token.is_empty() {
            return Err(RegisterError::EmptyToken);
        }
        if self.tokens.contains_key(token) {
            return Err(RegisterError::DuplicateToken);
        }
        self.tokens.insert(token.to_string(), account);
        Ok(())
    }

    pub fn authenticate(&self, token: &str) -> Result<AccountId, ApiError> {
        self.tokens.get(token).copied().ok_or(ApiError::Unauthorized)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ApiServer {
    store: Store,
    sessions: SessionTable,
}

enum Route<'a> {
    PostStatus,
    HomeTimeline,
    Notifications,
    Favourite(&'a str),
    Follow(&'a str),
}

impl ApiServer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut Store {
        &mut self.store
    }

    pub fn into_store(self) -> Store {
        self.store
    }

    /// Creates an account and binds `token` to it.
    pub fn register(
        &mut self,
        handle: &str,
        display_name: &str,
        kind: AccountKind,
        token: &str,
    ) -> Result<AccountId, RegisterError> {
        if token.is_empty() {
            return Err(RegisterError::EmptyToken);
        }
        if self.sessions.authenticate(token).is_ok() {
            return Err(RegisterError::DuplicateToken);
        }
        let id = self.store.create_account(handle, display_name, kind)?;
        self.sessions.issue(token, id)?;
        Ok(id)
    }

    pub fn authenticate(&self, token: &str) -> Result<AccountId, ApiError> {
        self.sessions.authenticate(token)
    }

    pub fn dispatch(&mut self, req: &ApiRequest) -> ApiResponse {
        match self.handle(req) {
            Ok(body) => ApiResponse::ok(body),
            Err(e) => e.into_response(),
        }
    }

    fn handle(&mut self, req: &ApiRequest) -> Result<Value, ApiError> {
        let viewer = self.authenticate(req.bearer.as_deref().unwrap_or(""))?;
        match (req.method, route(&req.path)?) {
            (Method::Post, Route::PostStatus) => self.post_status(viewer, req),
            (Method::Get, Route::HomeTimeline) => self.home_timeline(viewer, req),
            (Method::Get, Route::Notifications) => self.notifications(viewer, req),
            (Method::Post, Route::Favourite(id)) => self.favourite(viewer, id),
            (Method::Post, Route::Follow(id)) => self.follow(viewer, id),
            _ => Err(ApiError::NotFound(format!("no route for {}", req.path))),
        }
    }

    fn post_status(&mut self, viewer: AccountId, req: &ApiRequest) -> Result<Value, ApiError> {
        let body = req
            .body
            .as_ref()
            .and_then(Value::as_object)
            .ok_or_else(|| ApiError::BadRequest("expected a JSON object body".into()))?;
        let text = body
            .get("status")
            .and_then(Value::as_str)
            .ok_or_else(|| ApiError::BadRequest("\"status\" must be a string".into()))?;
        let parent = match body.get("in_reply_to_id") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(parse_id::<PostId>(s, "status")?),
            Some(_) => {
                return Err(ApiError::BadRequest(
                    "\"in_reply_to_id\" must be a string or null".into(),
                ))
            }
        };
        let post = self.store.append_post(viewer, text, parent)?;
        Ok(to_value(StatusView::of(&self.store, &post)))
    }

    fn home_timeline(&mut self, viewer: AccountId, req: &ApiRequest) -> Result<Value, ApiError> {
        let limit = match req.query_param("limit") {
            None => DEFAULT_TIMELINE_LIMIT,
            Some(raw) => match raw.parse::<usize>() {
                Ok(n) if n > 0 => n.min(MAX_TIMELINE_LIMIT),
                _ => return Err(ApiError::BadRequest(format!("invalid limit {raw:?}"))),
            },
        };
        let page = self.store.home_timeline(viewer, limit)?;
        let views: Vec<StatusView> = page.iter().map(|p| StatusView::of(&self.store, p)).collect();
        Ok(to_value(views))
    }

    fn notifications(&mut self, viewer: AccountId, req: &ApiRequest) -> Result<Value, ApiError> {
        let unread = match req.query_param("unread") {
            None | Some("false") => false,
            Some("true") => true,
            Some(raw) => return Err(ApiError::BadRequest(format!("invalid unread {raw:?}"))),
        };
        let found = self.store.notifications_for(viewer, unread)?;
        let views: Vec<NotificationView> = found
            .iter()
            .map(|n| NotificationView::of(&self.store, n))
            .collect();
        Ok(to_value(views))
    }

    fn favourite(&mut self, viewer: AccountId, id: &str) -> Result<Value, ApiError> {
        let post = parse_id::<PostId>(id, "status")?;
        self.store.favourite_post(viewer, post)?;
        let post = self.store.post(post).expect("favourited post exists");
        Ok(to_value(StatusView::of(&self.store, post)))
    }

    fn follow(&mut self, viewer: AccountId, id: &str) -> Result<Value, ApiError> {
        let target = parse_id::<AccountId>(id, "account")?;
        self.store.follow_account(viewer, target)?;
        Ok(to_value(FollowView {
            id: target.to_string(),
            following: true,
        }))
    }
}

fn route(path: &str) -> Result<Route<'_>, ApiError> {
    let segments: Vec<&str> = path.trim_end_matches('/').split('/').collect();
    match segments.as_slice() {
        ["", "api", "v1", "statuses"] => Ok(Route::PostStatus),
        ["", "api", "v1", "timelines", "home"] => Ok(Route::HomeTimeline),
        ["", "api", "v1", "notifications"] => Ok(Route::Notifications),
        ["", "api", "v1", "statuses", id, "favourite"] => Ok(Route::Favourite(id)),
        ["", "api", "v1", "accounts", id, "follow"] => Ok(Route::Follow(id)),
        _ => Err(ApiError::NotFound(format!("no route for {path}"))),
    }
}

fn parse_id<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::NotFound(format!("unknown {what} {raw:?}")))
}

fn to_value<T: serde::Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("views serialize")
}
