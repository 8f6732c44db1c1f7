//! Thin typed client for the mapping service.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use uuid::Uuid;

use ovpc_api as api;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("{kind}: {message}")]
    Api {
        status: u16,
        kind: String,
        message: String,
    },
}

impl ClientError {
    /// Coarse error class as reported by the server (`usage`, `data`,
    /// `geometry`, `not_found`, `internal`) or `transport`.
    pub fn kind(&self) -> &str {
        match self {
            ClientError::Transport(_) => "transport",
            ClientError::Api { kind, .. } => kind,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base = base_url.into();
        while base.ends_with('/') {
            base.pop();
        }
        Self {
            base,
            http: reqwest::Client::new(),
        }
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        req: &Req,
    ) -> Result<Resp, ClientError> {
        let response = self
            .http
            .post(format!("{}{path}", self.base))
            .json(req)
            .send()
            .await?;
        Self::decode(response).await
    }

    async fn decode<Resp: DeserializeOwned>(
        response: reqwest::Response,
    ) -> Result<Resp, ClientError> {
        let status = response.status();
        if status.is_success() {
            Ok(response.json().await?)
        } else {
            let body: api::ErrorBody = response.json().await.unwrap_or(api::ErrorBody {
                kind: "internal".into(),
                message: format!("http status {status}"),
            });
            Err(ClientError::Api {
                status: status.as_u16(),
                kind: body.kind,
                message: body.message,
            })
        }
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        let response = self
            .http
            .get(format!("{}/healthz", self.base))
            .send()
            .await?;
        if response.status().is_success() {
            Ok(())
        } else {
            Err(ClientError::Api {
                status: response.status().as_u16(),
                kind: "internal".into(),
                message: "health check failed".into(),
            })
        }
    }

    pub async fn visible(
        &self,
        req: &api::VisibleRequest,
    ) -> Result<api::VisibleResponse, ClientError> {
        self.post("/v1/visible", req).await
    }

    pub async fn mesh(&self, req: &api::MeshRequest) -> Result<api::MeshResponse, ClientError> {
        self.post("/v1/mesh", req).await
    }

    pub async fn navmap(
        &self,
        req: &api::NavmapRequest,
    ) -> Result<api::NavmapResponse, ClientError> {
        self.post("/v1/navmap", req).await
    }

    pub async fn query_nearest(
        &self,
        req: &api::NearestRequest,
    ) -> Result<api::NearestResponse, ClientError> {
        self.post("/v1/query/nearest", req).await
    }

    pub async fn query_project(
        &self,
        req: &api::ProjectRequest,
    ) -> Result<api::ProjectResponse, ClientError> {
        self.post("/v1/query/project", req).await
    }

    pub async fn query_collide(
        &self,
        req: &api::CollideRequest,
    ) -> Result<api::CollideResponse, ClientError> {
        self.post("/v1/query/collide", req).await
    }

    pub async fn eval_sweep(
        &self,
        req: &api::SweepRequest,
    ) -> Result<api::SweepResponse, ClientError> {
        self.post("/v1/eval/sweep", req).await
    }

    pub async fn bench(&self, req: &api::BenchRequest) -> Result<api::BenchResponse, ClientError> {
        self.post("/v1/bench", req).await
    }

    pub async fn session_create(
        &self,
        req: &api::CreateSessionRequest,
    ) -> Result<api::CreateSessionResponse, ClientError> {
        self.post("/v1/sessions", req).await
    }

    pub async fn session_delete(&self, id: Uuid) -> Result<(), ClientError> {
        let response = self
            .http
            .delete(format!("{}/v1/sessions/{id}", self.base))
            .send()
            .await?;
        let _: serde_json::Value = Self::decode(response).await?;
        Ok(())
    }

    pub async fn session_push_scan(
        &self,
        id: Uuid,
        req: &api::PushScanRequest,
    ) -> Result<api::PushScanResponse, ClientError> {
        self.post(&format!("/v1/sessions/{id}/scans"), req).await
    }

    pub async fn session_frame(
        &self,
        id: Uuid,
        req: &api::FrameRequest,
    ) -> Result<api::FrameResponse, ClientError> {
        self.post(&format!("/v1/sessions/{id}/frame"), req).await
    }

    pub async fn session_nearest(
        &self,
        id: Uuid,
        req: &api::SessionQueryNearest,
    ) -> Result<api::NearestResponse, ClientError> {
        self.post(&format!("/v1/sessions/{id}/query/nearest"), req)
            .await
    }

    pub async fn session_project(
        &self,
        id: Uuid,
        req: &api::SessionQueryProject,
    ) -> Result<api::ProjectResponse, ClientError> {
        self.post(&format!("/v1/sessions/{id}/query/project"), req)
            .await
    }

    pub async fn session_collide(
        &self,
        id: Uuid,
        req: &api::SessionQueryCollide,
    ) -> Result<api::CollideResponse, ClientError> {
        self.post(&format!("/v1/sessions/{id}/query/collide"), req)
            .await
    }
}
