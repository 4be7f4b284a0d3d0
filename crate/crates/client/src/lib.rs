//! Thin async client for the `/v1` endpoints.
//!
//! Calls return the raw status and body so callers can print exactly what the
//! service sent; [`Response::json`] decodes when a typed value is wanted.

use qasida_core::analysis::{AnalyzeRequest, ScanRequest};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request to {url} failed: {source}")]
    Transport { url: String, source: reqwest::Error },
    #[error("could not encode request: {0}")]
    Encode(#[from] serde_json::Error),
    #[error("service answered {status}: {body}")]
    Status { status: u16, body: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    pub fn is_success(&self) -> bool {
        self.status == 200
    }

    pub fn json<T: DeserializeOwned>(&self) -> Result<T, ClientError> {
        if !self.is_success() {
            return Err(ClientError::Status { status: self.status, body: self.body.clone() });
        }
        Ok(serde_json::from_str(&self.body)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterEntry {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        Client { base, http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn send(&self, req: reqwest::RequestBuilder, url: String) -> Result<Response, ClientError> {
        let resp = req.send().await.map_err(|source| ClientError::Transport { url: url.clone(), source })?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(|source| ClientError::Transport { url, source })?;
        Ok(Response { status, body })
    }

    async fn get(&self, path: &str) -> Result<Response, ClientError> {
        let url = format!("{}{path}", self.base);
        self.send(self.http.get(&url), url).await
    }

    async fn post(&self, path: &str, body: Vec<u8>) -> Result<Response, ClientError> {
        let url = format!("{}{path}", self.base);
        let req = self.http.post(&url).header(reqwest::header::CONTENT_TYPE, "application/json").body(body);
        self.send(req, url).await
    }

    pub async fn health(&self) -> Result<Response, ClientError> {
        self.get("/v1/health").await
    }

    pub async fn meters(&self) -> Result<Response, ClientError> {
        self.get("/v1/meters").await
    }

    pub async fn meter_list(&self) -> Result<Vec<MeterEntry>, ClientError> {
        self.meters().await?.json()
    }

    pub async fn analyze(&self, req: &AnalyzeRequest) -> Result<Response, ClientError> {
        self.post("/v1/analyze", serde_json::to_vec(req)?).await
    }

    pub async fn scan(&self, req: &ScanRequest) -> Result<Response, ClientError> {
        self.post("/v1/scan", serde_json::to_vec(req)?).await
    }

    /// Sends an arbitrary body, for callers that already hold JSON.
    pub async fn analyze_raw(&self, body: Vec<u8>) -> Result<Response, ClientError> {
        self.post("/v1/analyze", body).await
    }
}
