use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ovpc_api::ErrorBody;
use ovpc_core::{Error as CoreError, ErrorKind};

/// Service error carrying the HTTP status and the coarse kind exposed to
/// clients (which map it to exit codes).
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            kind: "not_found",
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "internal",
            message: message.into(),
        }
    }
}

impl<E: Into<CoreError>> From<E> for ApiError {
    fn from(err: E) -> Self {
        let err: CoreError = err.into();
        let (status, kind) = match err.kind() {
            ErrorKind::Usage => (StatusCode::BAD_REQUEST, "usage"),
            ErrorKind::Data => (StatusCode::BAD_REQUEST, "data"),
            ErrorKind::Geometry => (StatusCode::UNPROCESSABLE_ENTITY, "geometry"),
        };
        Self {
            status,
            kind,
            message: err.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ErrorBody {
                kind: self.kind.to_string(),
                message: self.message,
            }),
        )
            .into_response()
    }
}
