//! Network clients: an [`ApiClient`] that talks to the social server over HTTP
//! and a [`GenerationBackend`] for chat-completion shaped model endpoints.

use std::time::Duration;

use async_trait::async_trait;
use reqwest::Url;
use serde_json::{json, Value};
use sleeper_core::agent::{ApiClient, ApiFailure};
use sleeper_core::api::{ApiRequest, ApiResponse, Method};
use sleeper_core::lm::{BackendError, BackendSpec, GenerationBackend, PromptBundle, Role};

/// A bearer-token session against a running server.
#[derive(Clone)]
pub struct HttpApiClient {
    base: Url,
    token: String,
    http: reqwest::Client,
}

impl HttpApiClient {
    pub fn new(base_url: &str, token: impl Into<String>) -> Result<Self, ApiFailure> {
        let base = Url::parse(base_url).map_err(|e| ApiFailure::Transport(format!("bad base url: {e}")))?;
        Ok(HttpApiClient {
            base,
            token: token.into(),
            http: reqwest::Client::new(),
        })
    }
}

#[async_trait]
impl ApiClient for HttpApiClient {
    async fn send(&self, req: ApiRequest) -> Result<ApiResponse, ApiFailure> {
        let url = self
            .base
            .join(&req.path)
            .map_err(|e| ApiFailure::Transport(e.to_string()))?;
        let builder = match req.method {
            Method::Get => self.http.get(url),
            Method::Post => self.http.post(url),
        };
        let mut builder = builder.query(&req.query).bearer_auth(req.bearer.as_deref().unwrap_or(&self.token));
        if let Some(body) = &req.body {
            builder = builder.json(body);
        }
        let resp = builder.send().await.map_err(|e| ApiFailure::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let bytes = resp.bytes().await.map_err(|e| ApiFailure::Transport(e.to_string()))?;
        let body = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).map_err(|e| ApiFailure::Decode(e.to_string()))?
        };
        Ok(ApiResponse { status, body })
    }
}

/// Maps a prompt bundle onto the chat-completion message list: the system
/// text, the conversation (own posts as assistant turns), then the focus hint.
pub fn chat_messages(bundle: &PromptBundle) -> Vec<Value> {
    let mut out = vec![json!({ "role": "system", "content": bundle.system_text })];
    for m in &bundle.messages {
        let content = match (&m.role, &m.post_id) {
            (Role::Agent, _) => m.text.clone(),
            (Role::Other, Some(id)) => format!("@{} [post {id}]: {}", m.author_handle, m.text),
            (Role::Other, None) => format!("@{}: {}", m.author_handle, m.text),
        };
        let role = match m.role {
            Role::Agent => "assistant",
            Role::Other => "user",
        };
        out.push(json!({ "role": role, "content": content }));
    }
    let cue = match &bundle.focus_hint {
        Some(hint) => format!("Respond to this first: {hint}. Reply with the JSON object only."),
        None => "Decide your next action. Reply with the JSON object only.".to_string(),
    };
    out.push(json!({ "role": "user", "content": cue }));
    out
}

/// Any endpoint accepting `{"model", "temperature", "messages"}` and answering
/// with `choices[0].message.content`.
pub struct RemoteBackend {
    endpoint: Url,
    model: String,
    api_key: String,
    temperature: f64,
    http: reqwest::Client,
}

impl RemoteBackend {
    pub fn new(
        endpoint: &str,
        model: impl Into<String>,
        api_key: impl Into<String>,
        temperature: f64,
        timeout: Duration,
    ) -> Result<Self, BackendError> {
        let endpoint = Url::parse(endpoint).map_err(|e| BackendError::Config(format!("endpoint: {e}")))?;
        let http = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(RemoteBackend {
            endpoint,
            model: model.into(),
            api_key: api_key.into(),
            temperature,
            http,
        })
    }

    /// Builds a backend from a `remote` spec, reading the key from the named
    /// environment variable.
    pub fn from_spec(spec: &BackendSpec) -> Result<Self, BackendError> {
        let BackendSpec::Remote {
            endpoint,
            model,
            api_key_env,
            temperature,
            timeout_ms,
        } = spec
        else {
            return Err(BackendError::Config("not a remote backend".into()));
        };
        let key = std::env::var(api_key_env)
            .map_err(|_| BackendError::Config(format!("environment variable {api_key_env} is not set")))?;
        Self::new(endpoint, model.clone(), key, *temperature, Duration::from_millis(*timeout_ms))
    }
}

#[async_trait]
impl GenerationBackend for RemoteBackend {
    async fn generate(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": chat_messages(bundle),
        });
        let mut req = self.http.post(self.endpoint.clone()).json(&body);
        if !self.api_key.is_empty() {
            req = req.bearer_auth(&self.api_key);
        }
        let resp = req.send().await.map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().await.map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Http {
                status: status.as_u16(),
                body: text,
            });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| BackendError::Response(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Response("missing choices[0].message.content".into()))
    }
}
